#include "brace/brace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "brace/linalg.hpp"

namespace brace {

namespace {

bool is_phase_endpoint(long t) { return t > 0 && std::has_single_bit(static_cast<unsigned long>(t)); }

int floor_log2(long t) { return std::bit_width(static_cast<unsigned long>(t)) - 1; }

int ceil_log2(long t) {
  return t <= 1 ? 0 : std::bit_width(static_cast<unsigned long>(t - 1));
}

void check_shape(const Environment& env, Objective objective) {
  if (objective != Objective::Rec && env.num_recommendations() < env.num_treatments()) {
    throw ContractError("structural objectives need at least as many recommendations as treatments");
  }
}

// Plug-in argmax used for RECERT's reported structural candidate: clipped
// P̂^{-1} ĝ where a left inverse exists, an uninformative 1/2 otherwise.
void structural_candidate(const PhaseStats& stats, StructuralCertificate& cert) {
  const ModelDims dims = stats.dims();
  std::vector<int> assignment(dims.num_contexts, 0);
  double estimate = 0.0;
  for (int w = 0; w < dims.num_contexts; ++w) {
    Vector mu = Vector::Constant(dims.num_treatments, 0.5);
    if (stats.all_rows_defined(w)) {
      if (auto solved = solve_structural(stats.p_hat(w), stats.g_hat_vector(w))) {
        mu = solved->cwiseMax(0.0).cwiseMin(1.0);
      }
    }
    Eigen::Index best = 0;
    for (Eigen::Index x = 1; x < mu.size(); ++x) {
      if (mu(x) > mu(best)) best = x;
    }
    assignment[w] = static_cast<int>(best);
    estimate += stats.nu_hat(w) * mu(best);
  }
  cert.candidate = Policy{assignment, ActionSpace::Trt};
  cert.candidate_estimate = estimate;
}

}  // namespace

RunTrace run_brace_with(const Environment& env, long horizon, double delta, Rng& rng,
                        const BraceOptions& options, const PhaseObserver& observer) {
  if (horizon < 1) throw ContractError("horizon must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractError("delta must lie in (0, 1)");
  check_shape(env, options.objective);
  if (options.recert) check_shape(env, Objective::Trt);

  const ModelDims dims = ModelDims::of(env);
  const Objective objective = options.objective;
  const ActionSpace space = objective == Objective::Rec ? ActionSpace::Rec : ActionSpace::Trt;
  const int num_actions = space == ActionSpace::Rec ? dims.num_recommendations : dims.num_treatments;

  RunTrace trace;
  trace.horizon = horizon;
  trace.delta = delta;
  trace.output.objective = objective;
  trace.policies = enumerate_policies(dims.num_contexts, num_actions, space);
  if (options.recert) {
    trace.structural.emplace();
    trace.structural_policies =
        enumerate_policies(dims.num_contexts, dims.num_treatments, ActionSpace::Trt);
  }
  trace.rounds.reserve(static_cast<std::size_t>(horizon));

  PhaseStats stats(dims);
  std::optional<Policy> committed;
  const long first_check = static_cast<long>(dims.num_recommendations) * dims.num_contexts;

  for (long t = 1; t <= horizon; ++t) {
    const int w = env.draw_context(rng);
    const int z = committed ? (*committed)(w) : rng.uniform_int(dims.num_recommendations);
    const auto outcome = env.realize(rng, w, z);
    stats.record(w, z, outcome.x, outcome.y);
    trace.rounds.push_back({t, w, z, outcome.x, outcome.y,
                            committed ? RoundMode::Committed : RoundMode::Exploring});
    if (committed) continue;

    const bool endpoint = is_phase_endpoint(t);
    const bool check = endpoint || (options.per_round && t >= first_check);
    if (!check) continue;

    const int phase = endpoint ? floor_log2(t) : ceil_log2(t);
    const Radii radii = options.per_round ? compute_radii_bernstein(stats, phase, delta)
                                          : compute_radii(stats, phase, delta);
    const LocalIntervals local = local_intervals(stats, radii, objective, options.method);
    std::vector<double> weights;
    double slack;
    if (options.known_context_probs) {
      weights = env.context_probs();
      slack = 0.0;
    } else {
      weights = stats.nu_hat();
      slack = radii.eta;
    }
    PolicyBounds bounds = policy_bounds(local, weights, slack, trace.policies);
    const auto leader = stopping_check(bounds);
    if (observer) observer(PhaseSnapshot{t, phase, stats, radii, local, bounds});

    if (options.recert) {
      auto& cert = *trace.structural;
      const LocalIntervals str = structural_intervals(stats, radii, StructuralMethod::PointId);
      PolicyBounds str_bounds = policy_bounds(str, weights, slack, trace.structural_policies);
      const auto str_leader = stopping_check(str_bounds);
      const bool all_certified = str.certified_count() == dims.num_contexts;
      if (!cert.verdict && str_leader && all_certified) {
        cert.verdict = trace.structural_policies[*str_leader];
        cert.verdict_time = t;
      }
      structural_candidate(stats, cert);
      cert.frozen_bounds = std::move(str_bounds);
      cert.frozen_certified = str.certified;
    }

    PhaseEvent event = PhaseEvent::None;
    if (leader && objective == Objective::Rec) {
      committed = trace.policies[*leader];
      trace.output.rec_output = committed;
      trace.output.commit_time = t;
      event = PhaseEvent::Commit;
    } else if (leader && objective == Objective::Trt) {
      trace.output.trt_output = trace.policies[*leader];
      trace.output.commit_time = t;
      event = PhaseEvent::Stop;
    }

    if (endpoint || event != PhaseEvent::None) {
      trace.phases.push_back(
          {phase, t, local.certified, std::move(bounds), leader, event});
    }
    if (event == PhaseEvent::Stop) break;
  }
  return trace;
}

RunTrace run_brace(Objective objective, const Environment& env, long horizon, double delta, Rng& rng,
                   const PhaseObserver& observer) {
  BraceOptions options;
  options.objective = objective;
  return run_brace_with(env, horizon, delta, rng, options, observer);
}

RunTrace run_brace_fast(Objective objective, const Environment& env, long horizon, double delta,
                        Rng& rng) {
  if (objective == Objective::Inf) throw ContractError("the per-round variant covers REC and TRT");
  BraceOptions options;
  options.objective = objective;
  options.per_round = true;
  return run_brace_with(env, horizon, delta, rng, options);
}

RunTrace run_brace_partial(Objective objective, const Environment& env, long horizon, double delta,
                           Rng& rng, const PhaseObserver& observer) {
  if (objective == Objective::Rec) {
    throw ContractError("partial identification applies to structural objectives");
  }
  BraceOptions options;
  options.objective = objective;
  options.method = StructuralMethod::PartialId;
  return run_brace_with(env, horizon, delta, rng, options, observer);
}

RunTrace run_recert(const Environment& env, long horizon, double delta, Rng& rng) {
  BraceOptions options;
  options.objective = Objective::Rec;
  options.recert = true;
  RunTrace trace = run_brace_with(env, horizon, delta, rng, options);
  trace.output.trt_output = trace.structural->verdict;
  return trace;
}

}  // namespace brace
