#include "brace/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "brace/environment_json.hpp"
#include "brace/linalg.hpp"

namespace brace {

namespace {

constexpr double kProbTol = 1e-12;

void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

}  // namespace

Environment::Environment(std::string name, std::vector<double> context_probs,
                         int num_recommendations, int num_treatments,
                         std::vector<ComplianceType> types,
                         std::vector<std::vector<std::vector<double>>> mean_rewards)
    : name_(std::move(name)),
      context_probs_(std::move(context_probs)),
      num_recommendations_(num_recommendations),
      num_treatments_(num_treatments),
      types_(std::move(types)),
      mean_rewards_(std::move(mean_rewards)) {
  const std::size_t S = context_probs_.size();
  require(S >= 1, name_ + ": at least one context required");
  require(num_recommendations_ >= 1 && num_treatments_ >= 1, name_ + ": empty action space");
  double total = 0.0;
  for (double p : context_probs_) {
    require(p > 0.0, name_ + ": context probabilities must be positive");
    total += p;
  }
  require(std::abs(total - 1.0) <= kProbTol, name_ + ": context probabilities must sum to 1");
  require(!types_.empty(), name_ + ": at least one compliance type required");
  require(mean_rewards_.size() == types_.size(), name_ + ": mean_rewards needs one table per type");

  for (std::size_t w = 0; w < S; ++w) {
    double mass = 0.0;
    for (const auto& c : types_) {
      require(c.weights.size() == S, name_ + ": type weights need one entry per context");
      require(c.weights[w] >= 0.0, name_ + ": negative type weight");
      mass += c.weights[w];
    }
    require(std::abs(mass - 1.0) <= kProbTol, name_ + ": type weights must sum to 1 per context");
  }
  for (std::size_t c = 0; c < types_.size(); ++c) {
    const auto& map = types_[c].map;
    require(static_cast<int>(map.size()) == num_recommendations_,
            name_ + ": compliance map needs one entry per recommendation");
    for (int x : map) {
      require(x >= 0 && x < num_treatments_, name_ + ": compliance map entry out of range");
    }
    require(mean_rewards_[c].size() == S, name_ + ": mean_rewards needs one row per context");
    for (const auto& row : mean_rewards_[c]) {
      require(static_cast<int>(row.size()) == num_treatments_,
              name_ + ": mean_rewards row needs one entry per treatment");
      for (double m : row) require(m >= 0.0 && m <= 1.0, name_ + ": mean reward outside [0,1]");
    }
  }
  weights_by_context_.assign(S, std::vector<double>(types_.size()));
  for (std::size_t w = 0; w < S; ++w) {
    for (std::size_t c = 0; c < types_.size(); ++c) weights_by_context_[w][c] = types_[c].weights[w];
  }
}

int Environment::draw_context(Rng& rng) const { return rng.categorical(context_probs_); }

Environment::Outcome Environment::realize(Rng& rng, int w, int z) const {
  if (z < 0 || z >= num_recommendations_) throw ContractError("recommendation out of range");
  const int type = rng.categorical(weights_by_context_[w]);
  const int x = types_[type].map[z];
  const double y = rng.bernoulli(mean_rewards_[type][w][x]) ? 1.0 : 0.0;
  return {x, y};
}

const char* to_string(ActionSpace space) { return space == ActionSpace::Rec ? "REC" : "TRT"; }

std::string to_string(const Policy& policy) {
  std::ostringstream os;
  os << to_string(policy.space) << "(";
  for (std::size_t i = 0; i < policy.assignment.size(); ++i) {
    if (i) os << ",";
    os << policy.assignment[i];
  }
  os << ")";
  return os.str();
}

Matrix compliance_matrix(const Environment& env, int w) {
  Matrix p = Matrix::Zero(env.num_recommendations(), env.num_treatments());
  for (int c = 0; c < env.num_types(); ++c) {
    const double weight = env.type_weight(c, w);
    for (int z = 0; z < env.num_recommendations(); ++z) p(z, env.type_map(c, z)) += weight;
  }
  return p;
}

Vector itt_means(const Environment& env, int w) {
  Vector g = Vector::Zero(env.num_recommendations());
  for (int c = 0; c < env.num_types(); ++c) {
    const double weight = env.type_weight(c, w);
    for (int z = 0; z < env.num_recommendations(); ++z) {
      g(z) += weight * env.mean_reward(c, w, env.type_map(c, z));
    }
  }
  return g;
}

Vector structural_means(const Environment& env, int w) {
  Vector mu = Vector::Zero(env.num_treatments());
  for (int c = 0; c < env.num_types(); ++c) {
    const double weight = env.type_weight(c, w);
    for (int x = 0; x < env.num_treatments(); ++x) mu(x) += weight * env.mean_reward(c, w, x);
  }
  return mu;
}

double policy_value(const Environment& env, const Policy& policy) {
  const int S = env.num_contexts();
  if (static_cast<int>(policy.assignment.size()) != S) {
    throw ContractError("policy length does not match the number of contexts");
  }
  const int bound =
      policy.space == ActionSpace::Rec ? env.num_recommendations() : env.num_treatments();
  double value = 0.0;
  for (int w = 0; w < S; ++w) {
    const int a = policy(w);
    if (a < 0 || a >= bound) throw ContractError("policy action out of range");
    const Vector means =
        policy.space == ActionSpace::Rec ? itt_means(env, w) : structural_means(env, w);
    value += env.context_probs()[w] * means(a);
  }
  return value;
}

std::vector<Policy> enumerate_policies(int num_contexts, int num_actions, ActionSpace space) {
  if (num_contexts < 1 || num_actions < 1) throw ContractError("empty policy class");
  double count = std::pow(static_cast<double>(num_actions), num_contexts);
  if (count > static_cast<double>(kMaxPolicies)) {
    throw std::length_error("policy class has " + std::to_string(static_cast<long long>(count)) +
                            " members, above the limit of " + std::to_string(kMaxPolicies));
  }
  std::vector<Policy> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> digits(num_contexts, 0);
  while (true) {
    out.push_back(Policy{digits, space});
    int i = num_contexts - 1;
    while (i >= 0 && ++digits[i] == num_actions) digits[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

bool is_homogeneous(const Environment& env, double tol) {
  for (int w = 0; w < env.num_contexts(); ++w) {
    int reference = -1;
    for (int c = 0; c < env.num_types(); ++c) {
      if (env.type_weight(c, w) <= 0.0) continue;
      if (reference < 0) {
        reference = c;
        continue;
      }
      for (int x = 1; x < env.num_treatments(); ++x) {
        const double ref = env.mean_reward(reference, w, x) - env.mean_reward(reference, w, 0);
        const double cur = env.mean_reward(c, w, x) - env.mean_reward(c, w, 0);
        if (std::abs(ref - cur) > tol) return false;
      }
    }
  }
  return true;
}

namespace {

struct Best {
  Policy policy;
  double value;
  double gap;
};

Best best_policy(const Environment& env, ActionSpace space) {
  const int K = space == ActionSpace::Rec ? env.num_recommendations() : env.num_treatments();
  const auto policies = enumerate_policies(env.num_contexts(), K, space);
  std::size_t best = 0;
  std::vector<double> values(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    values[i] = policy_value(env, policies[i]);
    if (values[i] > values[best] + 1e-12) best = i;
  }
  double runner_up = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < policies.size(); ++i) {
    if (i != best) runner_up = std::max(runner_up, values[i]);
  }
  const double gap = policies.size() > 1 ? values[best] - runner_up : 0.0;
  return {policies[best], values[best], gap};
}

}  // namespace

EnvDiagnostics diagnostics(const Environment& env) {
  EnvDiagnostics d;
  const Best rec = best_policy(env, ActionSpace::Rec);
  const Best str = best_policy(env, ActionSpace::Trt);
  d.rec_opt = rec.policy;
  d.rec_opt_value = rec.value;
  d.rec_gap = rec.gap;
  d.str_opt = str.policy;
  d.str_opt_value = str.value;
  d.str_gap = str.gap;
  d.nu_min = *std::min_element(env.context_probs().begin(), env.context_probs().end());
  d.homogeneous = is_homogeneous(env);
  d.invertible = env.square();
  double worst = 0.0;
  for (int w = 0; w < env.num_contexts() && d.invertible; ++w) {
    const auto inv = left_inverse(compliance_matrix(env, w));
    if (!inv) {
      d.invertible = false;
      break;
    }
    worst = std::max(worst, inv->inf_norm);
  }
  if (d.invertible) d.inv_norm_max = worst;
  return d;
}

Environment make_homogeneous_environment(std::string name, std::vector<double> context_probs,
                                         const std::vector<Matrix>& compliance,
                                         const std::vector<Vector>& structural) {
  const int S = static_cast<int>(context_probs.size());
  if (static_cast<int>(compliance.size()) != S || static_cast<int>(structural.size()) != S) {
    throw ContractError("need one compliance matrix and one mean vector per context");
  }
  const int Kz = static_cast<int>(compliance[0].rows());
  const int Kx = static_cast<int>(compliance[0].cols());
  int num_maps = 1;
  for (int z = 0; z < Kz; ++z) num_maps *= Kx;

  std::vector<ComplianceType> types;
  std::vector<std::vector<std::vector<double>>> means;
  std::vector<int> map(Kz, 0);
  for (int m = 0; m < num_maps; ++m) {
    int code = m;
    for (int z = Kz - 1; z >= 0; --z) {
      map[z] = code % Kx;
      code /= Kx;
    }
    ComplianceType type{std::vector<double>(S, 0.0), map};
    bool any = false;
    for (int w = 0; w < S; ++w) {
      double weight = 1.0;
      for (int z = 0; z < Kz; ++z) weight *= compliance[w](z, map[z]);
      type.weights[w] = weight;
      any = any || weight > 0.0;
    }
    if (!any) continue;
    types.push_back(std::move(type));
    std::vector<std::vector<double>> table(S);
    for (int w = 0; w < S; ++w) {
      table[w].assign(structural[w].data(), structural[w].data() + Kx);
    }
    means.push_back(std::move(table));
  }
  // Renormalise away the rounding of the product coupling.
  for (int w = 0; w < S; ++w) {
    double mass = 0.0;
    for (const auto& t : types) mass += t.weights[w];
    for (auto& t : types) t.weights[w] /= mass;
  }
  return Environment(std::move(name), std::move(context_probs), Kz, Kx, std::move(types),
                     std::move(means));
}

Environment restrict_recommendations(const Environment& env, const std::vector<int>& labels,
                                     std::string name) {
  if (labels.empty()) throw ContractError("restriction needs at least one label");
  std::vector<ComplianceType> types;
  for (const auto& t : env.types()) {
    ComplianceType r{t.weights, {}};
    for (int z : labels) {
      if (z < 0 || z >= env.num_recommendations()) throw ContractError("label out of range");
      r.map.push_back(t.map[z]);
    }
    types.push_back(std::move(r));
  }
  return Environment(std::move(name), env.context_probs(), static_cast<int>(labels.size()),
                     env.num_treatments(), std::move(types), env.mean_rewards());
}

nlohmann::json environment_to_json(const Environment& env) {
  nlohmann::json types = nlohmann::json::array();
  for (const auto& t : env.types()) types.push_back({{"weights", t.weights}, {"map", t.map}});
  return {{"name", env.name()},
          {"context_probs", env.context_probs()},
          {"num_recommendations", env.num_recommendations()},
          {"num_treatments", env.num_treatments()},
          {"compliance_types", types},
          {"mean_rewards", env.mean_rewards()}};
}

Environment environment_from_json(const nlohmann::json& doc) {
  try {
    std::vector<ComplianceType> types;
    for (const auto& t : doc.at("compliance_types")) {
      types.push_back({t.at("weights").get<std::vector<double>>(),
                       t.at("map").get<std::vector<int>>()});
    }
    return Environment(doc.at("name").get<std::string>(),
                       doc.at("context_probs").get<std::vector<double>>(),
                       doc.at("num_recommendations").get<int>(), doc.at("num_treatments").get<int>(),
                       std::move(types),
                       doc.at("mean_rewards").get<std::vector<std::vector<std::vector<double>>>>());
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed environment document: ") + e.what());
  }
}

}  // namespace brace
