#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brace/environment.hpp"

namespace brace {

// Nuisances fixed before the evaluated round: per-context compliance model,
// structural means and recommendation propensities.
struct NuisancePair {
  std::vector<Matrix> p_hat;
  std::vector<Vector> mu_hat;
  std::vector<Vector> q;

  // Throws ContractError unless q rows are positive and sum to 1, and shapes agree.
  void validate() const;
  int num_contexts() const { return static_cast<int>(p_hat.size()); }
};

// Γ = μ̂_{π(w)} + e_{π(w)}ᵀ P̂(w)^{-1} e_z / q(z|w) · (y − μ̂_x(w)).
double score_gamma(const Policy& policy, int w, int z, int x, double y, const NuisancePair& nuis);

// E[Γ − μ_{0,π(w)}(w) | W = w] computed by enumerating recommendations and
// compliance types of the true population.
double conditional_bias_exact(const Environment& env, int w, const Policy& policy,
                              const NuisancePair& nuis);

// e_aᵀ P̂^{-1} (P̂ − P₀)(μ̂ − μ₀).
double product_form_rhs(const Matrix& p_hat, const Matrix& p0, const Vector& mu_hat,
                        const Vector& mu0, int action);

// Truth nuisances of a square population with uniform propensities.
NuisancePair exact_nuisances(const Environment& env);

// Entries of P̂ and μ̂ moved by up to ±scale; rows of P̂ stay stochastic and
// invertible; propensities drawn positive.
NuisancePair perturbed_nuisances(const Environment& env, Rng& rng, double scale = 0.05);

struct OrthoRow {
  std::string scenario;
  int context = 0;
  int perturbation = 0;
  int action = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double diff() const;
};

struct ScalingCheck {
  std::string scenario;
  int context = 0;
  double ratio = 0.0;  // bias(ε) / bias(ε/2)
};

struct OrthoReport {
  std::vector<OrthoRow> identity;        // random perturbations, homogeneous scenarios
  std::vector<OrthoRow> double_robust;   // one nuisance exact
  std::vector<ScalingCheck> scaling;
  std::vector<OrthoRow> educational;     // homogeneity_violation; not part of pass()
  double max_identity_diff() const;
  double max_double_robust() const;
  double max_scaling_error() const;
  bool pass() const;
};

inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kDoubleRobustTolerance = 1e-12;
inline constexpr double kScalingTolerance = 1e-9;

// Runs the identity, double-robustness and ε-scaling checks on every
// homogeneous square catalog scenario.
OrthoReport verify_orthoscore(std::uint64_t seed, int perturbations = 100);

}  // namespace brace
