#include <doctest.h>

#include <cmath>

#include "brace/baselines.hpp"
#include "brace/estimation.hpp"
#include "brace/harness.hpp"
#include "brace/scenarios.hpp"

using namespace brace;

TEST_CASE("Chosen-UCB finds the best arm under perfect compliance") {
  const Environment env = build_scenario("direct_control");
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const RunTrace trace = run_chosen_ucb(env, 2048, rng);
    REQUIRE(trace.output.rec_output);
    good += std::abs(policy_value(env, *trace.output.rec_output) - 0.775) <= 1e-12;
  }
  CHECK(good >= 9);
}

TEST_CASE("the three UCB variants coincide under perfect compliance") {
  const Environment env = build_scenario("direct_control");
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng r1(seed), r2(seed), r3(seed);
    const RunTrace a = run_chosen_ucb(env, 1024, r1);
    const RunTrace b = run_actual_ucb(env, 1024, r2);
    const RunTrace c = run_comply_ucb(env, 1024, r3);
    REQUIRE(a.rounds.size() == b.rounds.size());
    REQUIRE(a.rounds.size() == c.rounds.size());
    bool same = true;
    for (std::size_t i = 0; i < a.rounds.size(); ++i) {
      same = same && a.rounds[i].z == b.rounds[i].z && a.rounds[i].z == c.rounds[i].z &&
             a.rounds[i].y == b.rounds[i].y && a.rounds[i].y == c.rounds[i].y;
    }
    CHECK(same);
    CHECK(c.update_count.value() == 1024);
  }
}

TEST_CASE("Comply-UCB discards noncompliant rounds") {
  // Only label 0 is offered; it is followed half the time.
  const Environment env = restrict_recommendations(build_scenario("private_signal"), {0}, "label0");
  Rng rng(12);
  const long n = 10000;
  const RunTrace trace = run_comply_ucb(env, n, rng);
  const double ratio = double(trace.update_count.value()) / n;
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.1));
  long compliant = 0;
  for (const auto& r : trace.rounds) compliant += r.x == r.z;
  CHECK(compliant == trace.update_count.value());
}

TEST_CASE("Thompson sampling optimizes the recommendation value on the trap") {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cell = run_cell("actual_treatment_trap", "thompson", seed);
    good += std::abs(cell.row.estimated_primary_value - 0.81) <= 1e-9;
  }
  CHECK(good >= 8);
}

TEST_CASE("Actual-UCB follows the treatment-arm value on the trap") {
  int trapped = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cell = run_cell("actual_treatment_trap", "actual_ucb", seed);
    trapped += std::abs(cell.row.estimated_primary_value - 0.66) <= 1e-9;
  }
  CHECK(trapped >= 8);
}

TEST_CASE("2SLS shares the plug-in solve with BRACE") {
  Matrix p(2, 2);
  p << 0.8, 0.2, 0.3, 0.7;
  Vector g(2);
  g << 0.42, 0.57;
  const auto raw = solve_structural(p, g);
  REQUIRE(raw);
  const auto plug = plugin_mu(p, g, 0.01, 0.01);
  CHECK((*raw - plug.mu).cwiseAbs().maxCoeff() <= 1e-15);
  Matrix singular(2, 2);
  singular << 0.5, 0.5, 0.5, 0.5;
  CHECK_FALSE(solve_structural(singular, g).has_value());
}

TEST_CASE("2SLS never abstains") {
  for (const auto& scenario : scenario_names()) {
    for (const char* algo : {"2sls_epsilon_decay", "2sls_fixed", "2sls_adaptive"}) {
      CAPTURE(scenario);
      CAPTURE(algo);
      const auto cell = run_cell(scenario, algo, 0);
      REQUIRE_FALSE(cell.error);
      CHECK(cell.trace.output.trt_output.has_value());
      CHECK_FALSE(cell.row.abstained);
    }
  }
}

TEST_CASE("2SLS is misled when homogeneity fails") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (const char* algo : {"2sls_epsilon_decay", "2sls_fixed", "2sls_adaptive"}) {
      const auto cell = run_cell("homogeneity_violation", algo, seed);
      CHECK(cell.row.estimated_primary_value == doctest::Approx(0.45));
      CHECK(cell.row.wrong_nonabstain);
    }
  }
}

TEST_CASE("fixed schedule explores a quarter of the horizon") {
  const Environment env = build_scenario("strong_iv_easy");
  Rng rng(0);
  const RunTrace trace = run_2sls(TslsSchedule::Fixed, env, 1000, rng);
  long exploring = 0;
  for (const auto& r : trace.rounds) exploring += r.mode == RoundMode::Exploring;
  CHECK(exploring == 250);
}
