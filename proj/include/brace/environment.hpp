#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brace/rng.hpp"

namespace brace {

// Thrown when a caller violates a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A latent compliance type: per-context prevalence and a recommendation ->
// treatment map.
struct ComplianceType {
  std::vector<double> weights;  // one entry per context
  std::vector<int> map;         // one entry per recommendation
};

// Finite-context noncompliance population.
//
// mean_rewards[type][context][treatment] is the Bernoulli success probability of
// a unit of that type in that context when it receives that treatment.
class Environment {
 public:
  Environment(std::string name, std::vector<double> context_probs, int num_recommendations,
              int num_treatments, std::vector<ComplianceType> types,
              std::vector<std::vector<std::vector<double>>> mean_rewards);

  const std::string& name() const { return name_; }
  int num_contexts() const { return static_cast<int>(context_probs_.size()); }
  int num_recommendations() const { return num_recommendations_; }
  int num_treatments() const { return num_treatments_; }
  int num_types() const { return static_cast<int>(types_.size()); }
  bool square() const { return num_recommendations_ == num_treatments_; }

  const std::vector<double>& context_probs() const { return context_probs_; }
  const std::vector<ComplianceType>& types() const { return types_; }
  double type_weight(int type, int w) const { return types_[type].weights[w]; }
  int type_map(int type, int z) const { return types_[type].map[z]; }
  double mean_reward(int type, int w, int x) const { return mean_rewards_[type][w][x]; }
  const std::vector<std::vector<std::vector<double>>>& mean_rewards() const {
    return mean_rewards_;
  }

  // Sampling is split because the learner sees W_t before choosing Z_t.
  int draw_context(Rng& rng) const;
  struct Outcome {
    int x;
    double y;
  };
  Outcome realize(Rng& rng, int w, int z) const;

 private:
  std::string name_;
  std::vector<double> context_probs_;
  int num_recommendations_;
  int num_treatments_;
  std::vector<ComplianceType> types_;
  std::vector<std::vector<std::vector<double>>> mean_rewards_;
  std::vector<std::vector<double>> weights_by_context_;
};

enum class ActionSpace { Rec, Trt };

const char* to_string(ActionSpace space);

struct Policy {
  std::vector<int> assignment;  // action per context
  ActionSpace space = ActionSpace::Rec;

  int operator()(int w) const { return assignment[w]; }
  friend bool operator==(const Policy&, const Policy&) = default;
};

std::string to_string(const Policy& policy);

// Row z is the distribution of X given (W = w, Z = z).
Matrix compliance_matrix(const Environment& env, int w);
// g_z(w) = E[Y | W = w, Z = z].
Vector itt_means(const Environment& env, int w);
// mu_x(w) = E[Y(x) | W = w].
Vector structural_means(const Environment& env, int w);

// Exact value: REC policies are valued through the compliance channel, TRT
// policies by direct assignment.
double policy_value(const Environment& env, const Policy& policy);

inline constexpr std::size_t kMaxPolicies = 100000;

// All num_actions^num_contexts deterministic maps in lexicographic order
// (last context varies fastest).
std::vector<Policy> enumerate_policies(int num_contexts, int num_actions, ActionSpace space);

inline constexpr double kSingularThreshold = 1e-9;

struct EnvDiagnostics {
  double rec_gap = 0.0;
  double str_gap = 0.0;
  std::optional<double> inv_norm_max;  // L, present only when square and invertible
  double nu_min = 0.0;
  bool homogeneous = false;
  bool invertible = false;
  Policy rec_opt;
  Policy str_opt;
  double rec_opt_value = 0.0;
  double str_opt_value = 0.0;
};

EnvDiagnostics diagnostics(const Environment& env);

// True iff treatment contrasts do not depend on compliance type (among types
// with positive weight) in every context.
bool is_homogeneous(const Environment& env, double tol = 1e-12);

// Builds a population from per-context compliance matrices and structural
// means. Types are the product coupling of the rows, so every type shares the
// same mean table and the result is homogeneous.
Environment make_homogeneous_environment(std::string name, std::vector<double> context_probs,
                                         const std::vector<Matrix>& compliance,
                                         const std::vector<Vector>& structural);

// Keeps only the listed recommendation labels (in the given order).
Environment restrict_recommendations(const Environment& env, const std::vector<int>& labels,
                                     std::string name);

}  // namespace brace
