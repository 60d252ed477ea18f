#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brace/environment.hpp"
#include "brace/trace.hpp"

namespace brace {

enum class Track { Rec, Trt, Inf, Recert };

const char* to_string(Track track);

struct AlgorithmInfo {
  std::string name;
  Track track;
  bool structural;  // needs K_z >= K_x
};

const std::vector<AlgorithmInfo>& algorithms();
// Throws std::invalid_argument listing the valid names.
const AlgorithmInfo& algorithm_info(const std::string& name);

// Summary of one (scenario, algorithm, seed) cell. Values are true values under
// the oracle, not estimates, unless the name says otherwise.
struct MetricsRow {
  std::string scenario;
  std::string algorithm;
  std::uint64_t seed = 0;
  long horizon = 0;
  double delta = 0.0;

  double operational_regret = 0.0;
  double estimated_primary_value = 0.0;
  bool abstained = false;
  bool wrong_nonabstain = false;
  std::optional<bool> coverage_ok;             // INF
  std::optional<double> final_interval_width;  // INF
  std::optional<double> certified_share;       // structural interval runs
  std::optional<long> commit_time;
  long rounds_played = 0;

  // Treatment-side view for algorithms whose primary objective is REC.
  std::optional<double> trt_value;
  std::optional<bool> trt_abstained;
  std::optional<bool> trt_wrong_nonabstain;
  std::optional<double> trt_interval_width;  // RECERT frozen interval
  std::optional<double> trt_estimate;        // RECERT plug-in estimate
  std::optional<double> trt_candidate_value;  // RECERT true value of the plug-in argmax
  std::optional<long> update_count;

  // Long-format (metric, value) pairs in a fixed order; absent fields omitted.
  std::vector<std::pair<std::string, double>> metrics() const;
};

inline constexpr double kValueTolerance = 1e-12;

// Σ_t [max_z g_z(W_t) − g_{Z_t}(W_t)] over the rounds played.
double operational_regret(const Environment& env, const RunTrace& trace);

// True iff every enumerated policy's structural value lies in the displayed
// interval at every round.
bool inf_coverage(const Environment& env, const RunTrace& trace);

// Value of continued uniform recommendation, used when REC never commits.
double uniform_recommendation_value(const Environment& env);

MetricsRow compute_metrics(const Environment& env, const RunTrace& trace, const AlgorithmInfo& info);

// Invariant violations of one row (empty when clean).
std::vector<std::string> row_invariant_failures(const MetricsRow& row);

}  // namespace brace
