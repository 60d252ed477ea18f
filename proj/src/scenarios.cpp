#include "brace/scenarios.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "brace/linalg.hpp"

namespace brace {

namespace {

Matrix rows2(double a0, double a1, double b0, double b1) {
  Matrix p(2, 2);
  p << a0, a1, b0, b1;
  return p;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Environment single_context(const std::string& name, const Matrix& p, const Vector& mu) {
  return make_homogeneous_environment(name, {1.0}, {p}, {mu});
}

double best_value(const Environment& env, ActionSpace space) {
  const auto d = diagnostics(env);
  return space == ActionSpace::Rec ? d.rec_opt_value : d.str_opt_value;
}

ScenarioTarget best_rec(double v) {
  return {"best_rec_value", Comparison::Equal, v,
          [](const Environment& e) { return best_value(e, ActionSpace::Rec); }};
}
ScenarioTarget best_trt(double v) {
  return {"best_trt_value", Comparison::Equal, v,
          [](const Environment& e) { return best_value(e, ActionSpace::Trt); }};
}
ScenarioTarget inv_norm(Comparison cmp, double v) {
  return {"inv_norm_max", cmp, v, [](const Environment& e) {
            const auto d = diagnostics(e);
            return d.inv_norm_max.value_or(std::numeric_limits<double>::infinity());
          }};
}
ScenarioTarget str_gap(Comparison cmp, double v) {
  return {"str_gap", cmp, v, [](const Environment& e) { return diagnostics(e).str_gap; }};
}
ScenarioTarget rec_policy_value(std::vector<int> assignment, double v) {
  const std::string name = "rec_value" + to_string(Policy{assignment, ActionSpace::Rec}).substr(3);
  return {name, Comparison::Equal, v, [assignment](const Environment& e) {
            return policy_value(e, Policy{assignment, ActionSpace::Rec});
          }};
}

Environment build_private_signal() {
  // The downstream actor follows a private signal U in {0, 1} on label 0 and
  // always gives treatment 0 on label 1; only U's treatment succeeds.
  std::vector<ComplianceType> types = {{{0.5}, {0, 0}}, {{0.5}, {1, 0}}};
  std::vector<std::vector<std::vector<double>>> means = {{{1.0, 0.0}}, {{0.0, 1.0}}};
  return Environment("private_signal", {1.0}, 2, 2, std::move(types), std::move(means));
}

Environment build_homogeneity_violation() {
  // Compliers gain from treatment 1; never-takers would be harmed by it. The
  // never-takers' counterfactual is invisible in (P, g), so the IV plug-in
  // believes treatment 1 is far better.
  std::vector<ComplianceType> types = {{{0.5}, {0, 1}}, {{0.5}, {0, 0}}};
  std::vector<std::vector<std::vector<double>>> means = {{{0.0, 0.9}}, {{1.0, 0.0}}};
  return Environment("homogeneity_violation", {1.0}, 2, 2, std::move(types), std::move(means));
}

Environment build_actual_treatment_trap() {
  // Always-takers do well regardless, never-takers do badly, and compliers
  // prefer treatment 0. Updating on realized treatment rewards label 1.
  std::vector<ComplianceType> types = {{{0.4}, {0, 1}}, {{0.1}, {0, 0}}, {{0.5}, {1, 1}}};
  std::vector<std::vector<std::vector<double>>> means = {
      {{0.775, 0.4}}, {{0.0, 0.0}}, {{1.0, 1.0}}};
  return Environment("actual_treatment_trap", {1.0}, 2, 2, std::move(types), std::move(means));
}

Matrix rect_rows(std::initializer_list<std::pair<double, double>> rows) {
  Matrix p(static_cast<Eigen::Index>(rows.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [a, b] : rows) {
    p(i, 0) = a;
    p(i, 1) = b;
    ++i;
  }
  return p;
}

struct Entry {
  ScenarioSpec spec;
  std::function<Environment()> build;
};

std::vector<Entry> make_catalog() {
  std::vector<Entry> c;

  c.push_back({{"direct_control", 2048,
                {best_rec(0.775), best_trt(0.775), inv_norm(Comparison::Equal, 1.0)},
                true, true, 2, 2,
                "recommendations are treatments; REC and TRT coincide"},
               [] {
                 return single_context("direct_control", rows2(1, 0, 0, 1), vec2(0.625, 0.775));
               }});

  c.push_back({{"strong_iv_easy", 4096,
                {best_rec(0.74), best_trt(0.8), inv_norm(Comparison::Equal, 1.25),
                 str_gap(Comparison::Equal, 0.6)},
                true, true, 2, 2,
                "benign one-context strong first stage"},
               [] {
                 return single_context("strong_iv_easy", rows2(0.9, 0.1, 0.1, 0.9),
                                       vec2(0.2, 0.8));
               }});

  c.push_back({{"private_signal", 2048,
                {best_rec(1.0), best_trt(0.5), str_gap(Comparison::Equal, 0.0)},
                false, true, 2, 2,
                "the downstream actor uses a private signal; REC beats every direct rule"},
               build_private_signal});

  c.push_back({{"weak_iv_abstain", 4096,
                {inv_norm(Comparison::AtLeast, 10.0), str_gap(Comparison::AtLeast, 0.4),
                 best_trt(0.8)},
                true, true, 2, 2,
                "nearly singular first stage with a large structural gap"},
               [] {
                 return single_context("weak_iv_abstain", rows2(0.54, 0.46, 0.46, 0.54),
                                       vec2(0.2, 0.8));
               }});

  c.push_back({{"weak_iv_small_gap", 4096,
                {inv_norm(Comparison::AtLeast, 10.0), str_gap(Comparison::AtMost, 0.05),
                 best_trt(0.52)},
                true, true, 2, 2,
                "nearly singular first stage with a tiny structural gap"},
               [] {
                 return single_context("weak_iv_small_gap", rows2(0.54, 0.46, 0.46, 0.54),
                                       vec2(0.48, 0.52));
               }});

  c.push_back({{"homogeneity_violation", 2048,
                {best_rec(0.95),
                 {"naive_plugin_trt_value", Comparison::Equal, 0.45, naive_plugin_structural_value},
                 best_trt(0.5)},
                false, true, 2, 2,
                "treatment contrasts differ by compliance type"},
               build_homogeneity_violation});

  c.push_back({{"tradeoff", 2048,
                {best_rec(0.85), best_trt(0.9)},
                true, true, 2, 2,
                "valid IV model whose REC and TRT optima differ"},
               [] {
                 return single_context("tradeoff", rows2(0.1, 0.9, 0.8, 0.2), vec2(0.4, 0.9));
               }});

  c.push_back({{"workflow_redesign", 4096,
                {best_rec(0.69), best_trt(0.9)},
                true, true, 2, 2,
                "the current channel bottlenecks a strong direct treatment"},
               [] {
                 return single_context("workflow_redesign", rows2(0.9, 0.1, 0.2625, 0.7375),
                                       vec2(0.1, 0.9));
               }});

  c.push_back({{"actual_treatment_trap", 2048,
                {best_rec(0.81), rec_policy_value({1}, 0.66)},
                false, true, 2, 2,
                "updating on realized treatment prefers the wrong recommendation"},
               build_actual_treatment_trap});

  c.push_back({{"rare_context", 4096,
                {{"nu_min", Comparison::Equal, 0.05,
                  [](const Environment& e) { return diagnostics(e).nu_min; }},
                 best_trt(0.95 * 0.7 + 0.05 * 0.7)},
                true, true, 2, 2,
                "one low-probability context"},
               [] {
                 const Matrix p = rows2(0.9, 0.1, 0.1, 0.9);
                 return make_homogeneous_environment("rare_context", {0.95, 0.05}, {p, p},
                                                     {vec2(0.3, 0.7), vec2(0.7, 0.3)});
               }});

  c.push_back({{"rect_overidentified", 4096,
                {best_trt(0.9), best_rec(0.82)},
                true, false, 3, 2,
                "three recommendation labels identify two treatments"},
               [] {
                 return single_context("rect_overidentified",
                                       rect_rows({{0.9, 0.1}, {0.1, 0.9}, {0.5, 0.5}}),
                                       vec2(0.1, 0.9));
               }});

  c.push_back({{"weak_iv_rescued", 4096,
                {best_trt(0.9),
                 {"square_subdesign_inv_norm", Comparison::AtLeast, 10.0,
                  [](const Environment& e) {
                    const auto inv = left_inverse(compliance_matrix(e, 0).topRows(2));
                    return inv ? inv->inf_norm : std::numeric_limits<double>::infinity();
                  }},
                 {"full_design_left_inverse_norm", Comparison::AtMost, 2.0,
                  [](const Environment& e) {
                    const auto inv = left_inverse(compliance_matrix(e, 0));
                    return inv ? inv->inf_norm : std::numeric_limits<double>::infinity();
                  }}},
                true, false, 3, 2,
                "weak square projection rescued by an extra recommendation arm"},
               [] {
                 return single_context("weak_iv_rescued",
                                       rect_rows({{0.95, 0.05}, {0.9, 0.1}, {0.05, 0.95}}),
                                       vec2(0.1, 0.9));
               }});
  return c;
}

const std::vector<Entry>& catalog() {
  static const std::vector<Entry> entries = make_catalog();
  return entries;
}

const Entry& find(const std::string& name) {
  for (const auto& e : catalog()) {
    if (e.spec.name == name) return e;
  }
  std::string valid;
  for (const auto& n : scenario_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown scenario '" + name + "'; valid names: " + valid);
}

bool compare(Comparison cmp, double actual, double expected) {
  switch (cmp) {
    case Comparison::Equal:
      return std::abs(actual - expected) <= kTargetTolerance;
    case Comparison::AtLeast:
      return actual >= expected - kTargetTolerance;
    case Comparison::AtMost:
      return actual <= expected + kTargetTolerance;
  }
  return false;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& e : catalog()) out.push_back(e.spec.name);
    return out;
  }();
  return names;
}

const ScenarioSpec& scenario_spec(const std::string& name) { return find(name).spec; }

Environment build_scenario(const std::string& name) { return find(name).build(); }

double naive_plugin_structural_value(const Environment& env) {
  std::vector<int> assignment(env.num_contexts(), 0);
  for (int w = 0; w < env.num_contexts(); ++w) {
    const auto inv = left_inverse(compliance_matrix(env, w));
    if (!inv) continue;
    const Vector mu_hat = inv->matrix * itt_means(env, w);
    Eigen::Index best = 0;
    for (Eigen::Index x = 1; x < mu_hat.size(); ++x) {
      if (mu_hat(x) > mu_hat(best)) best = x;
    }
    assignment[w] = static_cast<int>(best);
  }
  return policy_value(env, Policy{assignment, ActionSpace::Trt});
}

bool VerificationReport::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

VerificationReport verify_scenario(const Environment& env, const ScenarioSpec& spec) {
  VerificationReport report{spec.name, {}};
  for (const auto& t : spec.targets) {
    const double actual = t.measure(env);
    report.checks.push_back({t.name, t.comparison, t.value, actual,
                             compare(t.comparison, actual, t.value)});
  }
  const auto d = diagnostics(env);
  auto flag = [&](const std::string& name, double expected, double actual) {
    report.checks.push_back(
        {name, Comparison::Equal, expected, actual, std::abs(expected - actual) < 0.5});
  };
  flag("homogeneous", spec.homogeneous, d.homogeneous);
  flag("invertible", spec.invertible, d.invertible);
  flag("square", spec.num_recommendations == spec.num_treatments, env.square());
  flag("num_recommendations", spec.num_recommendations, env.num_recommendations());
  flag("num_treatments", spec.num_treatments, env.num_treatments());
  return report;
}

Environment rescued_square_subdesign() {
  return restrict_recommendations(build_scenario("weak_iv_rescued"), {0, 1},
                                  "weak_iv_rescued_square");
}

}  // namespace brace
