#pragma once

#include <optional>
#include <span>
#include <vector>

#include "brace/environment.hpp"

namespace brace {

struct ModelDims {
  int num_contexts = 1;
  int num_recommendations = 2;
  int num_treatments = 2;

  static ModelDims of(const Environment& env) {
    return {env.num_contexts(), env.num_recommendations(), env.num_treatments()};
  }
};

// Sufficient statistics of the rounds observed so far. A copy taken at a phase
// endpoint is the phase snapshot (t_r = rounds()).
class PhaseStats {
 public:
  explicit PhaseStats(ModelDims dims);

  void record(int w, int z, int x, double y);

  const ModelDims& dims() const { return dims_; }
  long rounds() const { return rounds_; }
  long context_count(int w) const { return context_counts_[w]; }
  long count(int w, int z) const { return counts_[cell(w, z)]; }
  long transition_count(int w, int z, int x) const {
    return transitions_[cell(w, z) * dims_.num_treatments + x];
  }
  double reward_sum(int w, int z) const { return reward_sums_[cell(w, z)]; }

  bool row_defined(int w, int z) const { return count(w, z) > 0; }
  bool all_rows_defined(int w) const;

  double nu_hat(int w) const;
  std::vector<double> nu_hat() const;
  // Undefined (absent) when N(w, z) = 0.
  std::optional<double> g_hat(int w, int z) const;
  // Unbiased sample variance of rewards at (w, z); absent when N < 2.
  std::optional<double> reward_variance(int w, int z) const;

  // Rows with N = 0 are left as zeros; entries of ĝ for such rows are 0.
  Matrix p_hat(int w) const;
  Vector g_hat_vector(int w) const;

 private:
  std::size_t cell(int w, int z) const {
    return static_cast<std::size_t>(w) * dims_.num_recommendations + z;
  }

  ModelDims dims_;
  long rounds_ = 0;
  std::vector<long> context_counts_;
  std::vector<long> counts_;
  std::vector<double> reward_sums_;
  std::vector<double> reward_sq_sums_;
  std::vector<long> transitions_;
};

// Confidence radii. Logarithms are natural; K in the union bound is split into
// K_z (the recommendation index) and K_x (the multinomial support), which
// coincide in the square case.
double radius_a(long count, ModelDims dims, int phase, double delta);
double radius_b(long count, ModelDims dims, int phase, double delta);
double radius_d(long rounds, int num_contexts, int phase, double delta);
double eta(std::span<const double> d);

// Empirical-Bernstein alternative to radius_b; never larger than radius_b.
double radius_b_bernstein(long count, double variance, ModelDims dims, int phase, double delta);

struct Radii {
  int phase = 0;
  ModelDims dims;
  std::vector<double> a;  // per (w, z)
  std::vector<double> b;  // per (w, z)
  std::vector<double> d;  // per w
  double eta = 0.0;

  double a_at(int w, int z) const { return a[static_cast<std::size_t>(w) * dims.num_recommendations + z]; }
  double b_at(int w, int z) const { return b[static_cast<std::size_t>(w) * dims.num_recommendations + z]; }
  double a_max(int w) const;
  double b_max(int w) const;
};

// Radii at a phase endpoint (t_r = stats.rounds()).
Radii compute_radii(const PhaseStats& stats, int phase, double delta);
// Radii with empirical-Bernstein b and the current round count in d.
Radii compute_radii_bernstein(const PhaseStats& stats, int phase, double delta);

struct Certification {
  bool certified = false;
  std::optional<double> inv_norm;
};

// Certified iff P̂ has a left inverse (sigma_min > 1e-9) and
// ||P̂^{-1}||_inf * a_w <= 1/2. Square matrices use the inverse, tall ones the
// least-squares left inverse; wide ones are never certified.
Certification certify(const Matrix& p_hat, double a_w);

// Raw linear solve P̂^{-1} ĝ (left inverse when tall); absent when singular.
std::optional<Vector> solve_structural(const Matrix& p_hat, const Vector& g_hat);

struct PluginEstimate {
  Vector mu;           // not clipped
  double half_width;   // ||P̂^{-1}||_inf (a_w + b_max)
};

// Requires a certified context; throws ContractError otherwise.
PluginEstimate plugin_mu(const Matrix& p_hat, const Vector& g_hat, double a_w, double b_max);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

// [centre - radius, centre + radius] intersected with [0, 1], endpoints clipped
// independently so lo <= hi is preserved.
Interval clipped_interval(double centre, double radius);

enum class Objective { Rec, Trt, Inf };
enum class StructuralMethod { PointId, PartialId };

const char* to_string(Objective objective);

struct LocalIntervals {
  ActionSpace space = ActionSpace::Rec;
  int num_contexts = 0;
  int num_actions = 0;
  std::vector<Interval> intervals;              // per (w, action)
  std::vector<bool> certified;                  // per w; structural only
  std::vector<std::optional<double>> inv_norm;  // per w; structural only
  std::vector<std::optional<PluginEstimate>> plugin;  // per w; certified only
  std::vector<bool> infeasible;                 // per w; partial identification only

  const Interval& at(int w, int a) const {
    return intervals[static_cast<std::size_t>(w) * num_actions + a];
  }
  int certified_count() const;
};

LocalIntervals rec_intervals(const PhaseStats& stats, const Radii& radii);
LocalIntervals structural_intervals(const PhaseStats& stats, const Radii& radii,
                                    StructuralMethod method = StructuralMethod::PointId);
// REC objective uses recommendation intervals; TRT and INF use structural ones.
LocalIntervals local_intervals(const PhaseStats& stats, const Radii& radii, Objective objective,
                               StructuralMethod method = StructuralMethod::PointId);

struct PolicyBounds {
  ActionSpace space = ActionSpace::Rec;
  std::vector<double> lcb;
  std::vector<double> ucb;
  double eta = 0.0;

  std::size_t size() const { return lcb.size(); }
  Interval interval(std::size_t i) const { return {lcb[i], ucb[i]}; }
};

// LCB(pi) = sum_w weight(w) lo(w, pi(w)) - eta, UCB likewise. Bounds are not
// clipped. With known context probabilities pass them as weights and eta = 0.
PolicyBounds policy_bounds(const LocalIntervals& local, std::span<const double> weights, double eta,
                           const std::vector<Policy>& policies);

// Index of the unique policy whose LCB strictly exceeds every other UCB.
std::optional<std::size_t> stopping_check(const PolicyBounds& bounds);

}  // namespace brace
