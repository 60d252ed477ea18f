#include "brace/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "brace/linalg.hpp"
#include "brace/partial_id.hpp"

namespace brace {

PhaseStats::PhaseStats(ModelDims dims)
    : dims_(dims),
      context_counts_(dims.num_contexts, 0),
      counts_(static_cast<std::size_t>(dims.num_contexts) * dims.num_recommendations, 0),
      reward_sums_(counts_.size(), 0.0),
      reward_sq_sums_(counts_.size(), 0.0),
      transitions_(counts_.size() * dims.num_treatments, 0) {}

void PhaseStats::record(int w, int z, int x, double y) {
  ++rounds_;
  ++context_counts_[w];
  const std::size_t c = cell(w, z);
  ++counts_[c];
  reward_sums_[c] += y;
  reward_sq_sums_[c] += y * y;
  ++transitions_[c * dims_.num_treatments + x];
}

bool PhaseStats::all_rows_defined(int w) const {
  for (int z = 0; z < dims_.num_recommendations; ++z) {
    if (!row_defined(w, z)) return false;
  }
  return true;
}

double PhaseStats::nu_hat(int w) const {
  return rounds_ == 0 ? 0.0 : static_cast<double>(context_counts_[w]) / rounds_;
}

std::vector<double> PhaseStats::nu_hat() const {
  std::vector<double> out(dims_.num_contexts);
  for (int w = 0; w < dims_.num_contexts; ++w) out[w] = nu_hat(w);
  return out;
}

std::optional<double> PhaseStats::g_hat(int w, int z) const {
  const long n = count(w, z);
  if (n == 0) return std::nullopt;
  return reward_sums_[cell(w, z)] / n;
}

std::optional<double> PhaseStats::reward_variance(int w, int z) const {
  const long n = count(w, z);
  if (n < 2) return std::nullopt;
  const double mean = reward_sums_[cell(w, z)] / n;
  const double ss = reward_sq_sums_[cell(w, z)] - n * mean * mean;
  return std::max(0.0, ss / (n - 1));
}

Matrix PhaseStats::p_hat(int w) const {
  Matrix p = Matrix::Zero(dims_.num_recommendations, dims_.num_treatments);
  for (int z = 0; z < dims_.num_recommendations; ++z) {
    const long n = count(w, z);
    if (n == 0) continue;
    for (int x = 0; x < dims_.num_treatments; ++x) {
      p(z, x) = static_cast<double>(transition_count(w, z, x)) / n;
    }
  }
  return p;
}

Vector PhaseStats::g_hat_vector(int w) const {
  Vector g = Vector::Zero(dims_.num_recommendations);
  for (int z = 0; z < dims_.num_recommendations; ++z) g(z) = g_hat(w, z).value_or(0.0);
  return g;
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ContractError("delta must lie in (0, 1)");
}

double phase_factor(int phase) {
  const double r1 = phase + 1.0;
  return r1 * r1;
}

double b_log(ModelDims dims, int phase, double delta) {
  return std::log(4.0 * dims.num_contexts * dims.num_recommendations * phase_factor(phase) / delta);
}

}  // namespace

double radius_a(long count, ModelDims dims, int phase, double delta) {
  check_delta(delta);
  const double n = static_cast<double>(std::max(count, 1L));
  const double log_term = std::log(std::pow(2.0, dims.num_treatments) * dims.num_contexts *
                                   dims.num_recommendations * phase_factor(phase) / delta);
  return std::sqrt(2.0 * log_term / n);
}

double radius_b(long count, ModelDims dims, int phase, double delta) {
  check_delta(delta);
  const double n = static_cast<double>(std::max(count, 1L));
  return std::sqrt(b_log(dims, phase, delta) / (2.0 * n));
}

double radius_d(long rounds, int num_contexts, int phase, double delta) {
  check_delta(delta);
  const double t = static_cast<double>(std::max(rounds, 1L));
  return std::sqrt(std::log(4.0 * num_contexts * phase_factor(phase) / delta) / (2.0 * t));
}

double eta(std::span<const double> d) {
  double s = 0.0;
  for (double v : d) s += v;
  return s;
}

double radius_b_bernstein(long count, double variance, ModelDims dims, int phase, double delta) {
  const double hoeffding = radius_b(count, dims, phase, delta);
  if (count < 2) return hoeffding;
  const double l = b_log(dims, phase, delta);
  const double n = static_cast<double>(count);
  const double eb = std::sqrt(2.0 * variance * l / n) + 7.0 * l / (3.0 * (n - 1.0));
  return std::min(eb, hoeffding);
}

double Radii::a_max(int w) const {
  double m = 0.0;
  for (int z = 0; z < dims.num_recommendations; ++z) m = std::max(m, a_at(w, z));
  return m;
}

double Radii::b_max(int w) const {
  double m = 0.0;
  for (int z = 0; z < dims.num_recommendations; ++z) m = std::max(m, b_at(w, z));
  return m;
}

namespace {

Radii radii_common(const PhaseStats& stats, int phase, double delta, bool bernstein) {
  const ModelDims dims = stats.dims();
  Radii r;
  r.phase = phase;
  r.dims = dims;
  r.a.resize(static_cast<std::size_t>(dims.num_contexts) * dims.num_recommendations);
  r.b.resize(r.a.size());
  r.d.resize(dims.num_contexts);
  for (int w = 0; w < dims.num_contexts; ++w) {
    for (int z = 0; z < dims.num_recommendations; ++z) {
      const std::size_t i = static_cast<std::size_t>(w) * dims.num_recommendations + z;
      const long n = stats.count(w, z);
      r.a[i] = radius_a(n, dims, phase, delta);
      const auto var = stats.reward_variance(w, z);
      r.b[i] = bernstein && var ? radius_b_bernstein(n, *var, dims, phase, delta)
                                : radius_b(n, dims, phase, delta);
    }
    r.d[w] = radius_d(stats.rounds(), dims.num_contexts, phase, delta);
  }
  r.eta = eta(r.d);
  return r;
}

}  // namespace

Radii compute_radii(const PhaseStats& stats, int phase, double delta) {
  return radii_common(stats, phase, delta, false);
}

Radii compute_radii_bernstein(const PhaseStats& stats, int phase, double delta) {
  return radii_common(stats, phase, delta, true);
}

Certification certify(const Matrix& p_hat, double a_w) {
  const auto inv = left_inverse(p_hat);
  if (!inv) return {};
  return {inv->inf_norm * a_w <= 0.5, inv->inf_norm};
}

std::optional<Vector> solve_structural(const Matrix& p_hat, const Vector& g_hat) {
  const auto inv = left_inverse(p_hat);
  if (!inv) return std::nullopt;
  return Vector(inv->matrix * g_hat);
}

PluginEstimate plugin_mu(const Matrix& p_hat, const Vector& g_hat, double a_w, double b_max) {
  const auto inv = left_inverse(p_hat);
  if (!inv) throw ContractError("plug-in inversion requested on a singular compliance matrix");
  if (!(inv->inf_norm * a_w <= 0.5)) {
    throw ContractError("plug-in inversion requested on an uncertified context");
  }
  return {inv->matrix * g_hat, inv->inf_norm * (a_w + b_max)};
}

Interval clipped_interval(double centre, double radius) {
  return {std::clamp(centre - radius, 0.0, 1.0), std::clamp(centre + radius, 0.0, 1.0)};
}

const char* to_string(Objective objective) {
  switch (objective) {
    case Objective::Rec:
      return "REC";
    case Objective::Trt:
      return "TRT";
    case Objective::Inf:
      return "INF";
  }
  return "?";
}

int LocalIntervals::certified_count() const {
  return static_cast<int>(std::count(certified.begin(), certified.end(), true));
}

LocalIntervals rec_intervals(const PhaseStats& stats, const Radii& radii) {
  const ModelDims dims = stats.dims();
  LocalIntervals out;
  out.space = ActionSpace::Rec;
  out.num_contexts = dims.num_contexts;
  out.num_actions = dims.num_recommendations;
  out.intervals.assign(static_cast<std::size_t>(dims.num_contexts) * dims.num_recommendations,
                       Interval{0.0, 1.0});
  for (int w = 0; w < dims.num_contexts; ++w) {
    for (int z = 0; z < dims.num_recommendations; ++z) {
      const auto g = stats.g_hat(w, z);
      if (!g) continue;
      out.intervals[static_cast<std::size_t>(w) * dims.num_recommendations + z] =
          clipped_interval(*g, radii.b_at(w, z));
    }
  }
  return out;
}

LocalIntervals structural_intervals(const PhaseStats& stats, const Radii& radii,
                                    StructuralMethod method) {
  const ModelDims dims = stats.dims();
  const int k = dims.num_treatments;
  LocalIntervals out;
  out.space = ActionSpace::Trt;
  out.num_contexts = dims.num_contexts;
  out.num_actions = k;
  out.intervals.assign(static_cast<std::size_t>(dims.num_contexts) * k, Interval{0.0, 1.0});
  out.certified.assign(dims.num_contexts, false);
  out.inv_norm.assign(dims.num_contexts, std::nullopt);
  out.plugin.assign(dims.num_contexts, std::nullopt);
  out.infeasible.assign(dims.num_contexts, false);

  for (int w = 0; w < dims.num_contexts; ++w) {
    if (stats.all_rows_defined(w)) {
      const Matrix p = stats.p_hat(w);
      const Certification cert = certify(p, radii.a_max(w));
      out.certified[w] = cert.certified;
      out.inv_norm[w] = cert.inv_norm;
      if (cert.certified) {
        out.plugin[w] = plugin_mu(p, stats.g_hat_vector(w), radii.a_max(w), radii.b_max(w));
      }
    }
    if (method == StructuralMethod::PointId) {
      if (!out.plugin[w]) continue;
      for (int x = 0; x < k; ++x) {
        out.intervals[static_cast<std::size_t>(w) * k + x] =
            clipped_interval(out.plugin[w]->mu(x), out.plugin[w]->half_width);
      }
    } else {
      const auto rows = moment_rows(stats, radii, w);
      const PartialIdResult box = partial_id_box(rows, k);
      out.infeasible[w] = box.infeasible;
      for (int x = 0; x < k; ++x) out.intervals[static_cast<std::size_t>(w) * k + x] = box.bounds[x];
    }
  }
  return out;
}

LocalIntervals local_intervals(const PhaseStats& stats, const Radii& radii, Objective objective,
                               StructuralMethod method) {
  if (objective == Objective::Rec) return rec_intervals(stats, radii);
  return structural_intervals(stats, radii, method);
}

PolicyBounds policy_bounds(const LocalIntervals& local, std::span<const double> weights, double eta,
                           const std::vector<Policy>& policies) {
  if (policies.empty()) throw ContractError("policy class must be nonempty");
  if (static_cast<int>(weights.size()) != local.num_contexts) {
    throw ContractError("one weight per context required");
  }
  PolicyBounds out;
  out.space = local.space;
  out.eta = eta;
  out.lcb.resize(policies.size());
  out.ucb.resize(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    double lo = 0.0;
    double hi = 0.0;
    for (int w = 0; w < local.num_contexts; ++w) {
      const Interval& iv = local.at(w, policies[i](w));
      lo += weights[w] * iv.lo;
      hi += weights[w] * iv.hi;
    }
    out.lcb[i] = lo - eta;
    out.ucb[i] = hi + eta;
  }
  return out;
}

std::optional<std::size_t> stopping_check(const PolicyBounds& bounds) {
  if (bounds.size() < 2) return std::nullopt;
  std::size_t leader = 0;
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    if (bounds.lcb[i] > bounds.lcb[leader]) leader = i;
  }
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (i != leader && !(bounds.lcb[leader] > bounds.ucb[i])) return std::nullopt;
  }
  return leader;
}

}  // namespace brace
