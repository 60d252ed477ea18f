#include "brace/orthoscore.hpp"

#include <algorithm>
#include <cmath>

#include "brace/linalg.hpp"
#include "brace/scenarios.hpp"

namespace brace {

void NuisancePair::validate() const {
  if (mu_hat.size() != p_hat.size() || q.size() != p_hat.size()) {
    throw ContractError("nuisance components must cover the same contexts");
  }
  for (std::size_t w = 0; w < p_hat.size(); ++w) {
    if (p_hat[w].rows() != p_hat[w].cols()) throw ContractError("score requires square P̂");
    if (mu_hat[w].size() != p_hat[w].cols() || q[w].size() != p_hat[w].rows()) {
      throw ContractError("nuisance dimensions disagree");
    }
    if (q[w].minCoeff() <= 0.0) throw ContractError("propensities must be positive");
    if (std::abs(q[w].sum() - 1.0) > 1e-12) throw ContractError("propensities must sum to 1");
  }
}

namespace {

Matrix checked_inverse(const Matrix& p) {
  if (p.rows() != p.cols()) throw ContractError("score requires square P̂");
  const auto inv = left_inverse(p);
  if (!inv) throw ContractError("singular P̂ in orthogonal score");
  return inv->matrix;
}

}  // namespace

double score_gamma(const Policy& policy, int w, int z, int x, double y, const NuisancePair& nuis) {
  nuis.validate();
  const Matrix inv = checked_inverse(nuis.p_hat[w]);
  const int a = policy(w);
  const Vector& mu = nuis.mu_hat[w];
  return mu(a) + inv(a, z) / nuis.q[w](z) * (y - mu(x));
}

double conditional_bias_exact(const Environment& env, int w, const Policy& policy,
                              const NuisancePair& nuis) {
  nuis.validate();
  if (!env.square()) throw ContractError("orthogonal score verifier is square-only");
  const Matrix inv = checked_inverse(nuis.p_hat[w]);
  const int a = policy(w);
  const Vector& mu = nuis.mu_hat[w];
  double total_weight = 0.0;
  for (int c = 0; c < env.num_types(); ++c) total_weight += env.type_weight(c, w);

  double expectation = 0.0;
  for (int z = 0; z < env.num_recommendations(); ++z) {
    const double qz = nuis.q[w](z);
    double residual = 0.0;
    for (int c = 0; c < env.num_types(); ++c) {
      const double pc = env.type_weight(c, w) / total_weight;
      if (pc == 0.0) continue;
      const int x = env.type_map(c, z);
      residual += pc * (env.mean_reward(c, w, x) - mu(x));
    }
    expectation += qz * (mu(a) + inv(a, z) / qz * residual);
  }
  return expectation - structural_means(env, w)(a);
}

double product_form_rhs(const Matrix& p_hat, const Matrix& p0, const Vector& mu_hat,
                        const Vector& mu0, int action) {
  const Matrix inv = checked_inverse(p_hat);
  const Vector v = inv * ((p_hat - p0) * (mu_hat - mu0));
  return v(action);
}

NuisancePair exact_nuisances(const Environment& env) {
  NuisancePair n;
  for (int w = 0; w < env.num_contexts(); ++w) {
    n.p_hat.push_back(compliance_matrix(env, w));
    n.mu_hat.push_back(structural_means(env, w));
    n.q.push_back(Vector::Constant(env.num_recommendations(), 1.0 / env.num_recommendations()));
  }
  return n;
}

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

Matrix perturbed_matrix(const Matrix& p, Rng& rng, double scale) {
  for (;;) {
    Matrix out = p;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        out(i, j) = std::max(1e-3, out(i, j) + uniform(rng, -scale, scale));
      }
      out.row(i) /= out.row(i).sum();
    }
    if (left_inverse(out)) return out;
  }
}

Vector perturbed_vector(const Vector& v, Rng& rng, double scale) {
  Vector out = v;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += uniform(rng, -scale, scale);
  return out;
}

Vector random_propensity(int k, Rng& rng) {
  Vector q(k);
  for (int i = 0; i < k; ++i) q(i) = uniform(rng, 0.5, 1.5);
  return q / q.sum();
}

Policy constant_policy(int contexts, int action) {
  return Policy{std::vector<int>(contexts, action), ActionSpace::Trt};
}

void identity_rows(const std::string& name, const Environment& env, Rng& rng, int perturbations,
                   std::vector<OrthoRow>& out) {
  for (int i = 0; i < perturbations; ++i) {
    const NuisancePair nuis = perturbed_nuisances(env, rng);
    for (int w = 0; w < env.num_contexts(); ++w) {
      for (int a = 0; a < env.num_treatments(); ++a) {
        const double lhs = conditional_bias_exact(env, w, constant_policy(env.num_contexts(), a), nuis);
        const double rhs = product_form_rhs(nuis.p_hat[w], compliance_matrix(env, w),
                                            nuis.mu_hat[w], structural_means(env, w), a);
        out.push_back({name, w, i, a, lhs, rhs});
      }
    }
  }
}

void double_robust_rows(const std::string& name, const Environment& env, Rng& rng,
                        std::vector<OrthoRow>& out) {
  const NuisancePair truth = exact_nuisances(env);
  const NuisancePair moved = perturbed_nuisances(env, rng);
  NuisancePair exact_mu = moved;
  exact_mu.mu_hat = truth.mu_hat;
  NuisancePair exact_p = moved;
  exact_p.p_hat = truth.p_hat;
  int id = 0;
  for (const NuisancePair* nuis : {&exact_mu, &exact_p}) {
    for (int w = 0; w < env.num_contexts(); ++w) {
      for (int a = 0; a < env.num_treatments(); ++a) {
        const double lhs =
            conditional_bias_exact(env, w, constant_policy(env.num_contexts(), a), *nuis);
        out.push_back({name, w, id, a, lhs, 0.0});
      }
    }
    ++id;
  }
}

// Nuisances held at the catalog values; the truth moves along
// P₀(ε) = (1 − ε)P̂ + εP', μ₀(ε) = (1 − ε)μ̂ + εm', so the bias is exactly
// quadratic in ε.
void scaling_checks(const std::string& name, const Environment& env, Rng& rng,
                    std::vector<ScalingCheck>& out) {
  const NuisancePair nuis = exact_nuisances(env);
  std::vector<Matrix> target_p;
  std::vector<Vector> target_mu;
  for (int w = 0; w < env.num_contexts(); ++w) {
    Matrix p(env.num_recommendations(), env.num_treatments());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = uniform(rng, 0.05, 1.0);
      p.row(i) /= p.row(i).sum();
    }
    Vector m(env.num_treatments());
    for (Eigen::Index j = 0; j < m.size(); ++j) m(j) = rng.uniform01();
    target_p.push_back(p);
    target_mu.push_back(m);
  }
  auto bias_at = [&](double eps, int w, int a) {
    std::vector<Matrix> p0;
    std::vector<Vector> mu0;
    for (int v = 0; v < env.num_contexts(); ++v) {
      p0.push_back((1.0 - eps) * nuis.p_hat[v] + eps * target_p[v]);
      mu0.push_back((1.0 - eps) * nuis.mu_hat[v] + eps * target_mu[v]);
    }
    const Environment truth = make_homogeneous_environment(name, env.context_probs(), p0, mu0);
    return conditional_bias_exact(truth, w, constant_policy(env.num_contexts(), a), nuis);
  };
  for (int w = 0; w < env.num_contexts(); ++w) {
    const double big = bias_at(0.1, w, 0);
    const double small = bias_at(0.05, w, 0);
    out.push_back({name, w, big / small});
  }
}

}  // namespace

NuisancePair perturbed_nuisances(const Environment& env, Rng& rng, double scale) {
  NuisancePair n;
  for (int w = 0; w < env.num_contexts(); ++w) {
    n.p_hat.push_back(perturbed_matrix(compliance_matrix(env, w), rng, scale));
    n.mu_hat.push_back(perturbed_vector(structural_means(env, w), rng, scale));
    n.q.push_back(random_propensity(env.num_recommendations(), rng));
  }
  return n;
}

double OrthoRow::diff() const { return std::abs(lhs - rhs); }

double OrthoReport::max_identity_diff() const {
  double m = 0.0;
  for (const auto& r : identity) m = std::max(m, r.diff());
  return m;
}

double OrthoReport::max_double_robust() const {
  double m = 0.0;
  for (const auto& r : double_robust) m = std::max(m, r.diff());
  return m;
}

double OrthoReport::max_scaling_error() const {
  double m = 0.0;
  for (const auto& s : scaling) m = std::max(m, std::abs(s.ratio - 4.0));
  return m;
}

bool OrthoReport::pass() const {
  return !identity.empty() && max_identity_diff() <= kIdentityTolerance &&
         max_double_robust() <= kDoubleRobustTolerance && max_scaling_error() <= kScalingTolerance;
}

OrthoReport verify_orthoscore(std::uint64_t seed, int perturbations) {
  OrthoReport report;
  for (const auto& name : scenario_names()) {
    const ScenarioSpec& spec = scenario_spec(name);
    const Environment env = build_scenario(name);
    if (!env.square()) continue;
    Rng rng(mix64(seed ^ hash_string(name)));
    if (!spec.homogeneous) {
      identity_rows(name, env, rng, 1, report.educational);
      continue;
    }
    if (!spec.invertible) continue;
    identity_rows(name, env, rng, perturbations, report.identity);
    double_robust_rows(name, env, rng, report.double_robust);
    scaling_checks(name, env, rng, report.scaling);
  }
  return report;
}

}  // namespace brace
