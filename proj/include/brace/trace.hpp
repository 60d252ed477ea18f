#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "brace/estimation.hpp"

namespace brace {

enum class RoundMode { Exploring, Committed };

struct RoundRecord {
  long t = 0;
  int w = 0;
  int z = 0;
  int x = 0;
  double y = 0.0;
  RoundMode mode = RoundMode::Exploring;
};

enum class PhaseEvent { None, Commit, Stop, StructuralDeploy };

const char* to_string(PhaseEvent event);

// Snapshot taken when the stopping rule is evaluated: at every phase endpoint
// t = 2^r, and for the per-round variants also at the round where they stop.
struct PhaseRecord {
  int phase = 0;
  long t = 0;
  std::vector<bool> certified;  // per context; empty for REC intervals
  PolicyBounds bounds;
  std::optional<std::size_t> leader;
  PhaseEvent event = PhaseEvent::None;
};

struct RunOutput {
  Objective objective = Objective::Rec;
  std::optional<Policy> rec_output;  // deployed recommendation policy
  std::optional<Policy> trt_output;  // structural treatment policy
  std::optional<long> commit_time;   // REC commit or TRT stop round
};

// Parallel treatment-side certificate kept by RECERT.
struct StructuralCertificate {
  std::optional<Policy> verdict;  // deployed structural policy, absent = abstain
  std::optional<long> verdict_time;
  std::optional<Policy> candidate;  // plug-in argmax at the last pre-commit phase
  double candidate_estimate = 0.0;
  std::optional<PolicyBounds> frozen_bounds;
  std::vector<bool> frozen_certified;
};

struct RunTrace {
  std::string algorithm;
  std::string scenario;
  std::uint64_t seed = 0;
  long horizon = 0;
  double delta = 0.0;
  std::vector<Policy> policies;  // indexing PhaseRecord::bounds
  std::vector<RoundRecord> rounds;
  std::vector<PhaseRecord> phases;
  RunOutput output;
  std::optional<StructuralCertificate> structural;
  std::vector<Policy> structural_policies;  // indexing StructuralCertificate::frozen_bounds
  // Number of rounds in which a baseline updated its statistics (Comply-UCB).
  std::optional<long> update_count;

  // Interval shown at round t: the most recent snapshot with snapshot.t <= t.
  const PhaseRecord* displayed_at(long t) const;
};

nlohmann::json phase_to_json(const PhaseRecord& phase);
nlohmann::json summary_to_json(const RunTrace& trace);

// One JSON object per line: every phase record, then the summary record.
void write_jsonl(std::ostream& os, const RunTrace& trace);

}  // namespace brace
