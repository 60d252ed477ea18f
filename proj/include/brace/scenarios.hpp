#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "brace/environment.hpp"

namespace brace {

enum class Comparison { Equal, AtLeast, AtMost };

struct ScenarioTarget {
  std::string name;
  Comparison comparison = Comparison::Equal;
  double value = 0.0;
  std::function<double(const Environment&)> measure;
};

struct ScenarioSpec {
  std::string name;
  int default_horizon = 2048;
  std::vector<ScenarioTarget> targets;
  bool homogeneous = true;
  bool invertible = true;  // square and every P(w) invertible
  int num_recommendations = 2;
  int num_treatments = 2;
  std::string description;
};

inline constexpr double kTargetTolerance = 1e-9;

const std::vector<std::string>& scenario_names();

// Throws std::invalid_argument listing the valid names on an unknown name.
const ScenarioSpec& scenario_spec(const std::string& name);
Environment build_scenario(const std::string& name);

struct TargetCheck {
  std::string name;
  Comparison comparison;
  double expected;
  double actual;
  bool pass;
};

struct VerificationReport {
  std::string scenario;
  std::vector<TargetCheck> checks;
  bool pass() const;
};

VerificationReport verify_scenario(const Environment& env, const ScenarioSpec& spec);

// Value of the treatment policy chosen by argmax of the population plug-in
// P(w)^{-1} g(w); it differs from the structural optimum when contextual
// homogeneity fails.
double naive_plugin_structural_value(const Environment& env);

// The square 2-recommendation projection of weak_iv_rescued.
Environment rescued_square_subdesign();

}  // namespace brace
