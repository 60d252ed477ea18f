#pragma once

#include "brace/environment.hpp"
#include "brace/trace.hpp"

namespace brace {

// UCB1 over recommendation arms per context.
RunTrace run_chosen_ucb(const Environment& env, long horizon, Rng& rng);

// UCB over realized treatments; recommends the label of the UCB-max treatment.
// Rectangular environments use the first K_x recommendation labels.
RunTrace run_actual_ucb(const Environment& env, long horizon, Rng& rng);

// Chosen-UCB that only updates on compliant rounds (X_t = Z_t).
RunTrace run_comply_ucb(const Environment& env, long horizon, Rng& rng);

// Beta(1,1)-Bernoulli Thompson sampling per (w, z).
RunTrace run_thompson(const Environment& env, long horizon, Rng& rng);

enum class TslsSchedule { EpsilonDecay, Fixed, Adaptive };

const char* to_string(TslsSchedule schedule);

inline constexpr long kAdaptiveMinCount = 32;
inline constexpr double kAdaptiveMinSigma = 0.1;

// Uncertified plug-in IV learner; exploits the label of argmax P̂^{-1} ĝ.
RunTrace run_2sls(TslsSchedule schedule, const Environment& env, long horizon, Rng& rng);

}  // namespace brace
