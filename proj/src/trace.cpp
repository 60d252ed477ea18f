#include "brace/trace.hpp"

namespace brace {

const char* to_string(PhaseEvent event) {
  switch (event) {
    case PhaseEvent::None:
      return "none";
    case PhaseEvent::Commit:
      return "commit";
    case PhaseEvent::Stop:
      return "stop";
    case PhaseEvent::StructuralDeploy:
      return "structural_deploy";
  }
  return "?";
}

const PhaseRecord* RunTrace::displayed_at(long t) const {
  const PhaseRecord* shown = nullptr;
  for (const auto& p : phases) {
    if (p.t > t) break;
    shown = &p;
  }
  return shown;
}

namespace {

nlohmann::json policy_json(const std::optional<Policy>& p) {
  if (!p) return nullptr;
  return p->assignment;
}

}  // namespace

nlohmann::json phase_to_json(const PhaseRecord& phase) {
  nlohmann::json j;
  j["type"] = "phase";
  j["r"] = phase.phase;
  j["t"] = phase.t;
  j["space"] = to_string(phase.bounds.space);
  j["certified"] = phase.certified;
  j["eta"] = phase.bounds.eta;
  j["lcb"] = phase.bounds.lcb;
  j["ucb"] = phase.bounds.ucb;
  j["leader"] = phase.leader ? nlohmann::json(*phase.leader) : nlohmann::json(nullptr);
  j["event"] = to_string(phase.event);
  return j;
}

nlohmann::json summary_to_json(const RunTrace& trace) {
  nlohmann::json j;
  j["type"] = "summary";
  j["algorithm"] = trace.algorithm;
  j["scenario"] = trace.scenario;
  j["seed"] = trace.seed;
  j["horizon"] = trace.horizon;
  j["delta"] = trace.delta;
  j["objective"] = to_string(trace.output.objective);
  j["rounds_played"] = trace.rounds.size();
  j["rec_output"] = policy_json(trace.output.rec_output);
  j["trt_output"] = policy_json(trace.output.trt_output);
  j["commit_time"] =
      trace.output.commit_time ? nlohmann::json(*trace.output.commit_time) : nlohmann::json(nullptr);
  if (trace.structural) {
    const auto& s = *trace.structural;
    nlohmann::json sj;
    sj["verdict"] = policy_json(s.verdict);
    sj["verdict_time"] = s.verdict_time ? nlohmann::json(*s.verdict_time) : nlohmann::json(nullptr);
    sj["candidate"] = policy_json(s.candidate);
    sj["candidate_estimate"] = s.candidate_estimate;
    if (s.frozen_bounds) {
      sj["lcb"] = s.frozen_bounds->lcb;
      sj["ucb"] = s.frozen_bounds->ucb;
    }
    sj["certified"] = s.frozen_certified;
    j["structural"] = sj;
  }
  if (trace.update_count) j["update_count"] = *trace.update_count;
  return j;
}

void write_jsonl(std::ostream& os, const RunTrace& trace) {
  for (const auto& p : trace.phases) {
    nlohmann::json j = phase_to_json(p);
    j["algorithm"] = trace.algorithm;
    j["scenario"] = trace.scenario;
    j["seed"] = trace.seed;
    os << j.dump() << '\n';
  }
  os << summary_to_json(trace).dump() << '\n';
}

}  // namespace brace
