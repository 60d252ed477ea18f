#pragma once

#include <functional>

#include "brace/environment.hpp"
#include "brace/estimation.hpp"
#include "brace/trace.hpp"

namespace brace {

// Everything computed when the stopping rule is evaluated. Passed to an
// optional observer so audits can inspect the estimator state.
struct PhaseSnapshot {
  long t;
  int phase;
  const PhaseStats& stats;
  const Radii& radii;
  const LocalIntervals& local;
  const PolicyBounds& bounds;
};

using PhaseObserver = std::function<void(const PhaseSnapshot&)>;

struct BraceOptions {
  Objective objective = Objective::Rec;
  StructuralMethod method = StructuralMethod::PointId;
  // Evaluate the stopping rule every round with empirical-Bernstein ITT radii.
  bool per_round = false;
  // Keep a parallel treatment certificate beside the REC loop.
  bool recert = false;
  // Replace ν̂ by the true context distribution and drop η.
  bool known_context_probs = false;
};

// Shared engine behind the public entry points below.
RunTrace run_brace_with(const Environment& env, long horizon, double delta, Rng& rng,
                        const BraceOptions& options, const PhaseObserver& observer = {});

// Phase-doubling BRACE. REC commits forever on strict separation; TRT stops and
// outputs on strict separation; INF explores to the horizon and reports
// intervals. Structural objectives need K_z >= K_x.
RunTrace run_brace(Objective objective, const Environment& env, long horizon, double delta, Rng& rng,
                   const PhaseObserver& observer = {});

// REC/TRT with per-round stopping checks (from round K_z * S on, radii at
// phase ceil(log2 t)) and empirical-Bernstein ITT radii.
RunTrace run_brace_fast(Objective objective, const Environment& env, long horizon, double delta,
                        Rng& rng);

// TRT/INF with structural intervals from the partial-identification feasible
// set instead of certified inversion.
RunTrace run_brace_partial(Objective objective, const Environment& env, long horizon, double delta,
                           Rng& rng, const PhaseObserver& observer = {});

// BRACE-REC for deployment plus a stricter structural certificate: a treatment
// policy is declared only when TRT separation holds and every context is
// certified at a pre-commit phase. The certificate freezes at the REC commit.
RunTrace run_recert(const Environment& env, long horizon, double delta, Rng& rng);

}  // namespace brace
