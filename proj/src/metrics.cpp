#include "brace/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace brace {

const char* to_string(Track track) {
  switch (track) {
    case Track::Rec:
      return "rec";
    case Track::Trt:
      return "trt";
    case Track::Inf:
      return "inf";
    case Track::Recert:
      return "recert";
  }
  return "?";
}

const std::vector<AlgorithmInfo>& algorithms() {
  static const std::vector<AlgorithmInfo> list = {
      {"brace_rec", Track::Rec, false},
      {"brace_rec_fast", Track::Rec, false},
      {"chosen_ucb", Track::Rec, false},
      {"thompson", Track::Rec, false},
      {"actual_ucb", Track::Rec, false},
      {"comply_ucb", Track::Rec, false},
      {"brace_trt", Track::Trt, true},
      {"brace_trt_fast", Track::Trt, true},
      {"brace_trt_partial", Track::Trt, true},
      {"2sls_epsilon_decay", Track::Trt, false},
      {"2sls_fixed", Track::Trt, false},
      {"2sls_adaptive", Track::Trt, false},
      {"brace_inf", Track::Inf, true},
      {"brace_inf_partial", Track::Inf, true},
      {"recert", Track::Recert, true},
  };
  return list;
}

const AlgorithmInfo& algorithm_info(const std::string& name) {
  for (const auto& a : algorithms()) {
    if (a.name == name) return a;
  }
  std::string valid;
  for (const auto& a : algorithms()) valid += (valid.empty() ? "" : ", ") + a.name;
  throw std::invalid_argument("unknown algorithm '" + name + "'; valid: " + valid);
}

std::vector<std::pair<std::string, double>> MetricsRow::metrics() const {
  std::vector<std::pair<std::string, double>> out;
  auto flag = [](bool b) { return b ? 1.0 : 0.0; };
  out.emplace_back("operational_regret", operational_regret);
  out.emplace_back("estimated_primary_value", estimated_primary_value);
  out.emplace_back("abstained", flag(abstained));
  out.emplace_back("wrong_nonabstain", flag(wrong_nonabstain));
  if (coverage_ok) out.emplace_back("coverage_ok", flag(*coverage_ok));
  if (final_interval_width) out.emplace_back("final_interval_width", *final_interval_width);
  if (certified_share) out.emplace_back("certified_share", *certified_share);
  if (commit_time) out.emplace_back("commit_time", static_cast<double>(*commit_time));
  out.emplace_back("rounds_played", static_cast<double>(rounds_played));
  if (trt_value) out.emplace_back("trt_value", *trt_value);
  if (trt_abstained) out.emplace_back("trt_abstained", flag(*trt_abstained));
  if (trt_wrong_nonabstain) out.emplace_back("trt_wrong_nonabstain", flag(*trt_wrong_nonabstain));
  if (trt_interval_width) out.emplace_back("trt_interval_width", *trt_interval_width);
  if (trt_estimate) out.emplace_back("trt_estimate", *trt_estimate);
  if (trt_candidate_value) out.emplace_back("trt_candidate_value", *trt_candidate_value);
  if (update_count) out.emplace_back("update_count", static_cast<double>(*update_count));
  return out;
}

double operational_regret(const Environment& env, const RunTrace& trace) {
  std::vector<Vector> g;
  std::vector<double> best;
  for (int w = 0; w < env.num_contexts(); ++w) {
    g.push_back(itt_means(env, w));
    best.push_back(g.back().maxCoeff());
  }
  double regret = 0.0;
  for (const auto& r : trace.rounds) regret += best[r.w] - g[r.w](r.z);
  return regret;
}

bool inf_coverage(const Environment& env, const RunTrace& trace) {
  std::vector<double> values;
  values.reserve(trace.policies.size());
  for (const auto& p : trace.policies) values.push_back(policy_value(env, p));
  // Every round from 1 on displays the latest snapshot, so checking each
  // snapshot covers every displayed round.
  if (trace.phases.empty() || trace.phases.front().t != 1) return false;
  for (const auto& phase : trace.phases) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(phase.bounds.lcb[i] <= values[i] && values[i] <= phase.bounds.ucb[i])) return false;
    }
  }
  return true;
}

double uniform_recommendation_value(const Environment& env) {
  double v = 0.0;
  for (int w = 0; w < env.num_contexts(); ++w) v += env.context_probs()[w] * itt_means(env, w).mean();
  return v;
}

namespace {

std::optional<std::size_t> index_of(const std::vector<Policy>& policies, const Policy& p) {
  const auto it = std::find(policies.begin(), policies.end(), p);
  if (it == policies.end()) return std::nullopt;
  return static_cast<std::size_t>(it - policies.begin());
}

double share(const std::vector<bool>& certified) {
  if (certified.empty()) return 0.0;
  return static_cast<double>(std::count(certified.begin(), certified.end(), true)) /
         static_cast<double>(certified.size());
}

bool is_wrong(const Environment& env, const Policy& p, double best) {
  return policy_value(env, p) < best - kValueTolerance;
}

}  // namespace

MetricsRow compute_metrics(const Environment& env, const RunTrace& trace, const AlgorithmInfo& info) {
  const EnvDiagnostics diag = diagnostics(env);
  MetricsRow row;
  row.scenario = trace.scenario;
  row.algorithm = trace.algorithm;
  row.seed = trace.seed;
  row.horizon = trace.horizon;
  row.delta = trace.delta;
  row.operational_regret = operational_regret(env, trace);
  row.commit_time = trace.output.commit_time;
  row.rounds_played = static_cast<long>(trace.rounds.size());
  row.update_count = trace.update_count;
  const auto& rec = trace.output.rec_output;
  const auto& trt = trace.output.trt_output;

  switch (info.track) {
    case Track::Rec:
    case Track::Recert:
      row.abstained = !rec;
      row.estimated_primary_value = rec ? policy_value(env, *rec) : uniform_recommendation_value(env);
      row.wrong_nonabstain = rec && is_wrong(env, *rec, diag.rec_opt_value);
      break;
    case Track::Trt:
      row.abstained = !trt;
      row.estimated_primary_value = trt ? policy_value(env, *trt) : 0.0;
      row.wrong_nonabstain = trt && is_wrong(env, *trt, diag.str_opt_value);
      break;
    case Track::Inf:
      break;
  }

  if (info.track == Track::Rec && trt) {
    // Baselines read as treatment actors through their arm labels.
    row.trt_value = policy_value(env, *trt);
    row.trt_abstained = false;
    row.trt_wrong_nonabstain = is_wrong(env, *trt, diag.str_opt_value);
  }
  if (info.track == Track::Trt && !trace.phases.empty()) {
    row.certified_share = share(trace.phases.back().certified);
  }
  if (info.track == Track::Inf) {
    row.coverage_ok = inf_coverage(env, trace);
    const auto best = index_of(trace.policies, diag.str_opt);
    if (best && !trace.phases.empty()) {
      row.final_interval_width = trace.phases.back().bounds.interval(*best).width();
    }
    if (!trace.phases.empty()) row.certified_share = share(trace.phases.back().certified);
  }
  if (info.track == Track::Recert && trace.structural) {
    const auto& s = *trace.structural;
    row.trt_abstained = !s.verdict;
    row.trt_wrong_nonabstain = s.verdict && is_wrong(env, *s.verdict, diag.str_opt_value);
    row.trt_value = s.verdict ? policy_value(env, *s.verdict) : 0.0;
    row.trt_estimate = s.candidate_estimate;
    if (s.candidate) row.trt_candidate_value = policy_value(env, *s.candidate);
    row.certified_share = share(s.frozen_certified);
    const auto best = index_of(trace.structural_policies, diag.str_opt);
    if (best && s.frozen_bounds) row.trt_interval_width = s.frozen_bounds->interval(*best).width();
  }
  return row;
}

std::vector<std::string> row_invariant_failures(const MetricsRow& row) {
  std::vector<std::string> out;
  if (row.wrong_nonabstain && row.abstained) out.push_back("wrong_nonabstain while abstained");
  if (row.operational_regret < -1e-9) out.push_back("negative operational regret");
  const AlgorithmInfo& info = algorithm_info(row.algorithm);
  const bool baseline = row.algorithm.find("brace") == std::string::npos && info.track != Track::Recert;
  if (baseline && row.abstained) out.push_back("baseline abstained");
  if (info.track == Track::Inf && (!row.coverage_ok || !row.final_interval_width)) {
    out.push_back("INF row missing coverage fields");
  }
  if (info.track != Track::Inf && row.coverage_ok) out.push_back("coverage field on non-INF row");
  return out;
}

}  // namespace brace
