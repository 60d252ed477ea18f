#include <doctest.h>

#include <bit>

#include "brace/brace.hpp"
#include "brace/harness.hpp"
#include "brace/scenarios.hpp"

using namespace brace;

namespace {

bool same_rounds(const RunTrace& a, const RunTrace& b) {
  if (a.rounds.size() != b.rounds.size()) return false;
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    const auto& p = a.rounds[i];
    const auto& q = b.rounds[i];
    if (p.w != q.w || p.z != q.z || p.x != q.x || p.y != q.y || p.mode != q.mode) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("REC phase discipline and commit permanence") {
  const Environment env = build_scenario("strong_iv_easy");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const RunTrace trace = run_brace(Objective::Rec, env, 4096, 0.05, rng);
    CHECK(trace.rounds.size() == 4096);
    for (const auto& ph : trace.phases) {
      CHECK(std::has_single_bit(static_cast<unsigned long>(ph.t)));
      CHECK(ph.t == (1L << ph.phase));
    }
    REQUIRE(trace.output.commit_time);
    REQUIRE(trace.output.rec_output);
    const long c = *trace.output.commit_time;
    CHECK(std::has_single_bit(static_cast<unsigned long>(c)));
    const Policy& pi = *trace.output.rec_output;
    CHECK(policy_value(env, pi) == doctest::Approx(diagnostics(env).rec_opt_value));
    for (const auto& r : trace.rounds) {
      if (r.t <= c) {
        CHECK(r.mode == RoundMode::Exploring);
      } else {
        CHECK(r.mode == RoundMode::Committed);
        CHECK(r.z == pi(r.w));
      }
    }
    CHECK(trace.phases.back().event == PhaseEvent::Commit);
  }
}

TEST_CASE("TRT stop ends the run") {
  const Environment env = build_scenario("strong_iv_easy");
  Rng rng(3);
  const RunTrace trace = run_brace(Objective::Trt, env, 4096, 0.05, rng);
  REQUIRE(trace.output.trt_output);
  REQUIRE(trace.output.commit_time);
  CHECK(static_cast<long>(trace.rounds.size()) == *trace.output.commit_time);
  CHECK(trace.phases.back().event == PhaseEvent::Stop);
  CHECK(policy_value(env, *trace.output.trt_output) == doctest::Approx(diagnostics(env).str_opt_value));
}

TEST_CASE("INF runs to the horizon with certification flags") {
  const Environment env = build_scenario("strong_iv_easy");
  Rng rng(4);
  const RunTrace trace = run_brace(Objective::Inf, env, 2048, 0.05, rng);
  CHECK(trace.rounds.size() == 2048);
  CHECK_FALSE(trace.output.trt_output);
  CHECK(trace.phases.size() == 12);
  for (const auto& ph : trace.phases) CHECK(ph.certified.size() == env.num_contexts());
}

TEST_CASE("per-round checks commit no later than phase checks") {
  int earlier = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto base = run_cell("strong_iv_easy", "brace_rec", seed);
    const auto fast = run_cell("strong_iv_easy", "brace_rec_fast", seed);
    REQUIRE(base.row.commit_time);
    REQUIRE(fast.row.commit_time);
    CHECK_FALSE(fast.row.wrong_nonabstain);
    if (*fast.row.commit_time < *base.row.commit_time) ++earlier;
  }
  CHECK(earlier >= 8);
}

TEST_CASE("FAST still abstains on the weak-IV small-gap design") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cell = run_cell("weak_iv_small_gap", "brace_trt_fast", seed);
    CHECK(cell.row.abstained);
  }
}

TEST_CASE("shape contracts") {
  const Environment one_label = restrict_recommendations(build_scenario("private_signal"), {0}, "one");
  Rng rng(1);
  CHECK_THROWS_AS(run_brace(Objective::Trt, one_label, 64, 0.05, rng), ContractError);
  CHECK_THROWS_AS(run_brace(Objective::Inf, one_label, 64, 0.05, rng), ContractError);
  CHECK_NOTHROW(run_brace(Objective::Rec, one_label, 64, 0.05, rng));
  const Environment env = build_scenario("strong_iv_easy");
  CHECK_THROWS_AS(run_brace_fast(Objective::Inf, env, 64, 0.05, rng), ContractError);
  CHECK_THROWS_AS(run_brace_partial(Objective::Rec, env, 64, 0.05, rng), ContractError);
}

TEST_CASE("RECERT on the motivating examples") {
  SUBCASE("private signal: deploy label 0, no structural verdict") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto cell = run_cell("private_signal", "recert", seed);
      REQUIRE(cell.trace.output.rec_output);
      CHECK(cell.trace.output.rec_output->assignment == std::vector<int>{0});
      CHECK(cell.row.estimated_primary_value == doctest::Approx(1.0));
      CHECK_FALSE(cell.trace.output.trt_output);
      CHECK(cell.row.trt_abstained.value());
      REQUIRE(cell.row.trt_candidate_value);
      CHECK(*cell.row.trt_candidate_value == doctest::Approx(0.5));
    }
  }
  SUBCASE("workflow redesign: REC 0.69, treatment candidate worth 0.90") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto cell = run_cell("workflow_redesign", "recert", seed);
      REQUIRE(cell.trace.output.rec_output);
      CHECK(policy_value(build_scenario("workflow_redesign"), *cell.trace.output.rec_output) ==
            doctest::Approx(0.69));
      REQUIRE(cell.row.trt_candidate_value);
      CHECK(*cell.row.trt_candidate_value == doctest::Approx(0.90));
      CHECK_FALSE(cell.row.trt_wrong_nonabstain.value());
    }
  }
  SUBCASE("homogeneity violation: REC still 0.95, structural abstains") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto cell = run_cell("homogeneity_violation", "recert", seed);
      CHECK(cell.row.trt_abstained.value());
      CHECK_FALSE(cell.row.wrong_nonabstain);
    }
  }
}

TEST_CASE("certification is mostly monotone over phases") {
  const Environment env = build_scenario("strong_iv_easy");
  int monotone = 0;
  const int runs = 40;
  for (int seed = 0; seed < runs; ++seed) {
    Rng rng(cell_stream_seed("strong_iv_easy", seed));
    const RunTrace trace = run_brace(Objective::Inf, env, 4096, 0.05, rng);
    bool ok = true;
    for (std::size_t i = 1; i < trace.phases.size(); ++i) {
      for (std::size_t w = 0; w < trace.phases[i].certified.size(); ++w) {
        if (trace.phases[i - 1].certified[w] && !trace.phases[i].certified[w]) ok = false;
      }
    }
    monotone += ok;
    CHECK(trace.phases.back().certified == std::vector<bool>(env.num_contexts(), true));
  }
  CHECK(monotone >= 0.95 * runs);
}

TEST_CASE("runs are deterministic given the seed") {
  for (const char* algo : {"brace_rec", "brace_trt_fast", "brace_inf_partial", "recert"}) {
    CAPTURE(algo);
    const auto a = run_cell("rect_overidentified", algo, 7);
    const auto b = run_cell("rect_overidentified", algo, 7);
    CHECK(same_rounds(a.trace, b.trace));
    CHECK(a.row.metrics() == b.row.metrics());
  }
}
