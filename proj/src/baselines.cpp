#include "brace/baselines.hpp"

#include <cmath>
#include <limits>

#include "brace/estimation.hpp"
#include "brace/linalg.hpp"

namespace brace {

const char* to_string(TslsSchedule schedule) {
  switch (schedule) {
    case TslsSchedule::EpsilonDecay:
      return "epsilon_decay";
    case TslsSchedule::Fixed:
      return "fixed";
    case TslsSchedule::Adaptive:
      return "adaptive";
  }
  return "?";
}

namespace {

// Per-(context, arm) counts and reward sums.
struct ArmTable {
  int arms;
  std::vector<long> n;
  std::vector<double> sum;
  std::vector<long> context_rounds;

  ArmTable(int contexts, int arms)
      : arms(arms),
        n(static_cast<std::size_t>(contexts) * arms, 0),
        sum(n.size(), 0.0),
        context_rounds(contexts, 0) {}

  std::size_t at(int w, int a) const { return static_cast<std::size_t>(w) * arms + a; }

  void update(int w, int a, double y) {
    ++n[at(w, a)];
    sum[at(w, a)] += y;
  }

  double mean(int w, int a) const {
    const long k = n[at(w, a)];
    return k == 0 ? -std::numeric_limits<double>::infinity() : sum[at(w, a)] / k;
  }

  // Unplayed arms first, then the UCB1 index with log of the context's rounds.
  int ucb_arm(int w) const {
    for (int a = 0; a < arms; ++a) {
      if (n[at(w, a)] == 0) return a;
    }
    const double log_t = std::log(static_cast<double>(std::max(context_rounds[w], 1L)));
    int best = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < arms; ++a) {
      const double index = mean(w, a) + std::sqrt(2.0 * log_t / n[at(w, a)]);
      if (index > best_index) {
        best_index = index;
        best = a;
      }
    }
    return best;
  }

  int greedy_arm(int w) const {
    int best = 0;
    for (int a = 1; a < arms; ++a) {
      if (mean(w, a) > mean(w, best)) best = a;
    }
    return best;
  }

  std::vector<int> greedy_policy() const {
    std::vector<int> out(context_rounds.size());
    for (std::size_t w = 0; w < out.size(); ++w) out[w] = greedy_arm(static_cast<int>(w));
    return out;
  }
};

RunTrace new_trace(long horizon) {
  if (horizon < 1) throw ContractError("horizon must be at least 1");
  RunTrace trace;
  trace.horizon = horizon;
  trace.output.objective = Objective::Rec;
  trace.rounds.reserve(static_cast<std::size_t>(horizon));
  return trace;
}

// Recommendation labels read as treatment labels; labels without a treatment
// of the same index fall back to treatment 0.
Policy as_treatments(const std::vector<int>& labels, int num_treatments) {
  Policy p{labels, ActionSpace::Trt};
  for (int& a : p.assignment) {
    if (a >= num_treatments) a = 0;
  }
  return p;
}

void finish(RunTrace& trace, const Environment& env, std::vector<int> rec_labels,
            std::vector<int> treatments) {
  trace.output.rec_output = Policy{std::move(rec_labels), ActionSpace::Rec};
  trace.output.trt_output = as_treatments(treatments, env.num_treatments());
}

struct Step {
  int w;
  int x;
  double y;
};

Step play(const Environment& env, Rng& rng, RunTrace& trace, long t, int w, int z) {
  const auto out = env.realize(rng, w, z);
  trace.rounds.push_back({t, w, z, out.x, out.y, RoundMode::Exploring});
  return {w, out.x, out.y};
}

RunTrace chosen_or_comply(const Environment& env, long horizon, Rng& rng, bool comply_only) {
  RunTrace trace = new_trace(horizon);
  ArmTable table(env.num_contexts(), env.num_recommendations());
  long updates = 0;
  for (long t = 1; t <= horizon; ++t) {
    const int w = env.draw_context(rng);
    ++table.context_rounds[w];
    const int z = table.ucb_arm(w);
    const Step s = play(env, rng, trace, t, w, z);
    if (comply_only && s.x != z) continue;
    table.update(w, z, s.y);
    ++updates;
  }
  const auto labels = table.greedy_policy();
  finish(trace, env, labels, labels);
  if (comply_only) trace.update_count = updates;
  return trace;
}

}  // namespace

RunTrace run_chosen_ucb(const Environment& env, long horizon, Rng& rng) {
  return chosen_or_comply(env, horizon, rng, false);
}

RunTrace run_comply_ucb(const Environment& env, long horizon, Rng& rng) {
  return chosen_or_comply(env, horizon, rng, true);
}

RunTrace run_actual_ucb(const Environment& env, long horizon, Rng& rng) {
  RunTrace trace = new_trace(horizon);
  const int arms = std::min(env.num_recommendations(), env.num_treatments());
  ArmTable table(env.num_contexts(), env.num_treatments());
  for (long t = 1; t <= horizon; ++t) {
    const int w = env.draw_context(rng);
    ++table.context_rounds[w];
    int z = table.ucb_arm(w);
    if (z >= arms) z = 0;
    const Step s = play(env, rng, trace, t, w, z);
    table.update(w, s.x, s.y);
  }
  auto treatments = table.greedy_policy();
  std::vector<int> labels = treatments;
  for (int& a : labels) {
    if (a >= arms) a = 0;
  }
  finish(trace, env, labels, treatments);
  return trace;
}

RunTrace run_thompson(const Environment& env, long horizon, Rng& rng) {
  RunTrace trace = new_trace(horizon);
  const int arms = env.num_recommendations();
  ArmTable table(env.num_contexts(), arms);
  for (long t = 1; t <= horizon; ++t) {
    const int w = env.draw_context(rng);
    ++table.context_rounds[w];
    int z = 0;
    double best = -1.0;
    for (int a = 0; a < arms; ++a) {
      const double successes = table.sum[table.at(w, a)];
      const double failures = static_cast<double>(table.n[table.at(w, a)]) - successes;
      const double draw = rng.beta(1.0 + successes, 1.0 + failures);
      if (draw > best) {
        best = draw;
        z = a;
      }
    }
    const Step s = play(env, rng, trace, t, w, z);
    table.update(w, z, s.y);
  }
  std::vector<int> labels(env.num_contexts());
  for (int w = 0; w < env.num_contexts(); ++w) {
    double best = -1.0;
    for (int a = 0; a < arms; ++a) {
      const double successes = table.sum[table.at(w, a)];
      const double posterior_mean = (1.0 + successes) / (2.0 + table.n[table.at(w, a)]);
      if (posterior_mean > best) {
        best = posterior_mean;
        labels[w] = a;
      }
    }
  }
  finish(trace, env, labels, labels);
  return trace;
}

namespace {

// argmax of the unguarded plug-in P̂^{-1} ĝ; treatment 0 when it is unavailable.
int plugin_argmax(const PhaseStats& stats, int w) {
  if (!stats.all_rows_defined(w)) return 0;
  const auto mu = solve_structural(stats.p_hat(w), stats.g_hat_vector(w));
  if (!mu) return 0;
  Eigen::Index best = 0;
  for (Eigen::Index x = 1; x < mu->size(); ++x) {
    if ((*mu)(x) > (*mu)(best)) best = x;
  }
  return static_cast<int>(best);
}

bool adaptive_ready(const PhaseStats& stats) {
  const ModelDims dims = stats.dims();
  for (int w = 0; w < dims.num_contexts; ++w) {
    for (int z = 0; z < dims.num_recommendations; ++z) {
      if (stats.count(w, z) < kAdaptiveMinCount) return false;
    }
    if (sigma_min(stats.p_hat(w)) < kAdaptiveMinSigma) return false;
  }
  return true;
}

}  // namespace

RunTrace run_2sls(TslsSchedule schedule, const Environment& env, long horizon, Rng& rng) {
  RunTrace trace = new_trace(horizon);
  trace.output.objective = Objective::Trt;
  const ModelDims dims = ModelDims::of(env);
  PhaseStats stats(dims);
  const long fixed_rounds = (horizon + 3) / 4;
  bool ready = false;
  for (long t = 1; t <= horizon; ++t) {
    const int w = env.draw_context(rng);
    bool explore = false;
    switch (schedule) {
      case TslsSchedule::EpsilonDecay:
        explore = rng.uniform01() < std::pow(static_cast<double>(t), -1.0 / 3.0);
        break;
      case TslsSchedule::Fixed:
        explore = t <= fixed_rounds;
        break;
      case TslsSchedule::Adaptive:
        explore = !ready;
        break;
    }
    int z = explore ? rng.uniform_int(dims.num_recommendations) : plugin_argmax(stats, w);
    if (z >= dims.num_recommendations) z = 0;
    const Step s = play(env, rng, trace, t, w, z);
    trace.rounds.back().mode = explore ? RoundMode::Exploring : RoundMode::Committed;
    stats.record(w, z, s.x, s.y);
    if (schedule == TslsSchedule::Adaptive) ready = adaptive_ready(stats);
  }
  std::vector<int> treatments(dims.num_contexts);
  for (int w = 0; w < dims.num_contexts; ++w) treatments[w] = plugin_argmax(stats, w);
  std::vector<int> labels = treatments;
  for (int& a : labels) {
    if (a >= dims.num_recommendations) a = 0;
  }
  finish(trace, env, labels, treatments);
  return trace;
}

}  // namespace brace
