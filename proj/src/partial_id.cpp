#include "brace/partial_id.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brace {

namespace {

constexpr double kFeasTol = 1e-9;

// Half-space a . mu <= beta.
struct HalfSpace {
  Eigen::RowVectorXd a;
  double beta;
};

std::vector<HalfSpace> half_spaces(std::span<const MomentRow> rows, int k) {
  std::vector<HalfSpace> hs;
  for (int j = 0; j < k; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(k);
    e(j) = 1.0;
    hs.push_back({e, 1.0});
    hs.push_back({-e, 0.0});
  }
  for (const auto& r : rows) {
    hs.push_back({r.coeffs, r.target + r.slack});
    hs.push_back({-r.coeffs, -(r.target - r.slack)});
  }
  return hs;
}

bool feasible(const std::vector<HalfSpace>& hs, const Vector& mu) {
  for (const auto& h : hs) {
    if (h.a.dot(mu) > h.beta + kFeasTol) return false;
  }
  return true;
}

}  // namespace

PartialIdResult partial_id_box(std::span<const MomentRow> rows, int num_treatments) {
  const int k = num_treatments;
  for (const auto& r : rows) {
    if (r.coeffs.size() != k) throw ContractError("moment row has the wrong width");
  }
  PartialIdResult out;
  out.bounds.assign(k, Interval{0.0, 1.0});
  if (rows.empty()) return out;

  const auto hs = half_spaces(rows, k);
  const int m = static_cast<int>(hs.size());
  std::vector<double> lo(k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
  bool any = false;

  // Enumerate k-subsets of the active constraints.
  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  Matrix a(k, k);
  Vector beta(k);
  while (true) {
    for (int i = 0; i < k; ++i) {
      a.row(i) = hs[pick[i]].a;
      beta(i) = hs[pick[i]].beta;
    }
    Eigen::FullPivLU<Matrix> lu(a);
    if (lu.isInvertible() && std::abs(lu.determinant()) > 1e-14) {
      const Vector v = lu.solve(beta);
      if (feasible(hs, v)) {
        any = true;
        for (int j = 0; j < k; ++j) {
          lo[j] = std::min(lo[j], v(j));
          hi[j] = std::max(hi[j], v(j));
        }
      }
    }
    int i = k - 1;
    while (i >= 0 && pick[i] == m - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }

  if (!any) {
    out.infeasible = true;
    return out;
  }
  for (int j = 0; j < k; ++j) {
    const double l = std::clamp(lo[j], 0.0, 1.0);
    const double h = std::clamp(hi[j], 0.0, 1.0);
    out.bounds[j] = {std::min(l, h), std::max(l, h)};
  }
  return out;
}

PartialIdResult partial_id_interval(std::span<const MomentRow> rows, int num_treatments, int x) {
  if (x < 0 || x >= num_treatments) throw ContractError("treatment index out of range");
  PartialIdResult box = partial_id_box(rows, num_treatments);
  return {{box.bounds[x]}, box.infeasible};
}

std::vector<MomentRow> moment_rows(const PhaseStats& stats, const Radii& radii, int w) {
  std::vector<MomentRow> rows;
  const Matrix p = stats.p_hat(w);
  const Vector g = stats.g_hat_vector(w);
  for (int z = 0; z < stats.dims().num_recommendations; ++z) {
    if (!stats.row_defined(w, z)) continue;
    rows.push_back({p.row(z), g(z), radii.a_at(w, z) + radii.b_at(w, z)});
  }
  return rows;
}

}  // namespace brace
