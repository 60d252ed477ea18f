#include <doctest.h>

#include "brace/linalg.hpp"
#include "brace/scenarios.hpp"

using namespace brace;

TEST_CASE("catalog has twelve scenarios and every target holds") {
  REQUIRE(scenario_names().size() == 12);
  for (const auto& name : scenario_names()) {
    CAPTURE(name);
    const Environment env = build_scenario(name);
    const VerificationReport report = verify_scenario(env, scenario_spec(name));
    for (const auto& c : report.checks) {
      CAPTURE(c.name);
      CAPTURE(c.actual);
      CHECK(c.pass);
    }
    CHECK(env.name() == name);
    const int h = scenario_spec(name).default_horizon;
    CHECK((h == 2048 || h == 4096));
  }
}

TEST_CASE("unknown scenario names list the valid ones") {
  try {
    build_scenario("no_such_thing");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("weak_iv_rescued") != std::string::npos);
  }
}

TEST_CASE("published oracle values") {
  auto best = [](const char* name) { return diagnostics(build_scenario(name)); };
  CHECK(best("private_signal").rec_opt_value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(best("private_signal").str_opt_value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(best("workflow_redesign").rec_opt_value == doctest::Approx(0.69).epsilon(1e-9));
  CHECK(best("workflow_redesign").str_opt_value == doctest::Approx(0.90).epsilon(1e-9));
  CHECK(best("tradeoff").rec_opt_value == doctest::Approx(0.85).epsilon(1e-9));
  CHECK(best("tradeoff").str_opt_value == doctest::Approx(0.90).epsilon(1e-9));
  CHECK(best("tradeoff").homogeneous);
  CHECK(best("homogeneity_violation").rec_opt_value == doctest::Approx(0.95).epsilon(1e-9));
  CHECK(naive_plugin_structural_value(build_scenario("homogeneity_violation")) ==
        doctest::Approx(0.45).epsilon(1e-9));
  CHECK(best("actual_treatment_trap").rec_opt_value == doctest::Approx(0.81).epsilon(1e-9));
  CHECK(policy_value(build_scenario("actual_treatment_trap"), Policy{{1}, ActionSpace::Rec}) ==
        doctest::Approx(0.66).epsilon(1e-9));
}

TEST_CASE("qualitative flags") {
  CHECK(diagnostics(build_scenario("direct_control")).homogeneous);
  CHECK_FALSE(diagnostics(build_scenario("homogeneity_violation")).homogeneous);
  const Environment rect = build_scenario("rect_overidentified");
  CHECK(rect.num_recommendations() == 3);
  CHECK(rect.num_treatments() == 2);
  CHECK_FALSE(diagnostics(rect).inv_norm_max.has_value());

  const auto weak = diagnostics(build_scenario("weak_iv_abstain"));
  REQUIRE(weak.inv_norm_max);
  CHECK(*weak.inv_norm_max >= 10.0);
  CHECK(weak.str_gap >= 0.4);
  const auto small = diagnostics(build_scenario("weak_iv_small_gap"));
  CHECK(*small.inv_norm_max >= 10.0);
  CHECK(small.str_gap <= 0.05);
  CHECK(diagnostics(build_scenario("rare_context")).nu_min == doctest::Approx(0.05));
}

TEST_CASE("rescued design: weak square sub-design, well-conditioned full design") {
  const auto sub = diagnostics(rescued_square_subdesign());
  REQUIRE(sub.inv_norm_max);
  CHECK(*sub.inv_norm_max >= 10.0);
  const auto full = left_inverse(compliance_matrix(build_scenario("weak_iv_rescued"), 0));
  REQUIRE(full);
  CHECK(full->inf_norm <= 2.0);
}

TEST_CASE("flags in the spec table agree with the oracle") {
  for (const auto& name : scenario_names()) {
    CAPTURE(name);
    const Environment env = build_scenario(name);
    const ScenarioSpec& spec = scenario_spec(name);
    const auto d = diagnostics(env);
    CHECK(d.homogeneous == spec.homogeneous);
    CHECK(d.invertible == spec.invertible);
    CHECK(env.num_recommendations() == spec.num_recommendations);
    CHECK(env.num_treatments() == spec.num_treatments);
  }
}
