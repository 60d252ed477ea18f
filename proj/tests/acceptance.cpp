// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "brace/brace.hpp"
#include "brace/harness.hpp"
#include "brace/linalg.hpp"
#include "brace/orthoscore.hpp"
#include "brace/scenarios.hpp"

using namespace brace;

namespace {

constexpr int kSeeds = 10;
constexpr int kAuditSeeds = 200;
constexpr long kAuditHorizon = 2048;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool near(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

// Cells of the 10-seed grid keyed by (scenario, algorithm).
class Grid {
 public:
  Grid() {
    SuiteConfig c;
    c.scenarios = scenario_names();
    for (const auto& a : algorithms()) c.algorithms.push_back(a.name);
    c.seeds = kSeeds;
    c.keep_traces = false;
    result_ = run_suite(c);
    for (const auto& cell : result_.cells) {
      if (cell.skipped || cell.error) continue;
      rows_[{cell.row.scenario, cell.row.algorithm}].push_back(cell.row);
    }
  }

  const std::vector<MetricsRow>& rows(const std::string& scenario, const std::string& algo) const {
    static const std::vector<MetricsRow> empty;
    const auto it = rows_.find({scenario, algo});
    return it == rows_.end() ? empty : it->second;
  }

  int count(const std::string& scenario, const std::string& algo,
            const std::function<bool(const MetricsRow&)>& pred) const {
    int n = 0;
    for (const auto& r : rows(scenario, algo)) n += pred(r);
    return n;
  }

  double mean(const std::string& scenario, const std::string& algo,
              const std::function<double(const MetricsRow&)>& f) const {
    const auto& rs = rows(scenario, algo);
    double s = 0.0;
    for (const auto& r : rs) s += f(r);
    return rs.empty() ? NAN : s / rs.size();
  }

  const SuiteResult& result() const { return result_; }

 private:
  SuiteResult result_;
  std::map<std::pair<std::string, std::string>, std::vector<MetricsRow>> rows_;
};

double value_of(const char* scenario) { return diagnostics(build_scenario(scenario)).rec_opt_value; }

Outcome oracle_exactness() {
  std::vector<std::string> bad;
  auto expect = [&](const char* what, double got, double want) {
    if (!near(got, want)) bad.push_back(fmt("%s=%.12g (want %g)", what, got, want));
  };
  const auto dc = diagnostics(build_scenario("direct_control"));
  expect("direct_control rec", dc.rec_opt_value, 0.775);
  expect("direct_control trt", dc.str_opt_value, 0.775);
  const auto ps = diagnostics(build_scenario("private_signal"));
  expect("private_signal rec", ps.rec_opt_value, 1.0);
  expect("private_signal trt", ps.str_opt_value, 0.5);
  const auto wf = diagnostics(build_scenario("workflow_redesign"));
  expect("workflow rec", wf.rec_opt_value, 0.69);
  expect("workflow trt", wf.str_opt_value, 0.90);
  const auto tr = diagnostics(build_scenario("tradeoff"));
  expect("tradeoff rec", tr.rec_opt_value, 0.85);
  expect("tradeoff trt", tr.str_opt_value, 0.90);
  expect("homogeneity_violation rec", value_of("homogeneity_violation"), 0.95);
  expect("homogeneity_violation naive", naive_plugin_structural_value(build_scenario("homogeneity_violation")),
         0.45);
  expect("trap rec", value_of("actual_treatment_trap"), 0.81);
  expect("trap label 1", policy_value(build_scenario("actual_treatment_trap"), Policy{{1}, ActionSpace::Rec}),
         0.66);
  std::string detail = bad.empty() ? "all oracle values within 1e-9" : "";
  for (const auto& b : bad) detail += b + "; ";
  return {bad.empty(), detail};
}

Outcome collapse() {
  const Environment env = build_scenario("direct_control");
  double worst = 0.0;
  for (const auto& p : enumerate_policies(env.num_contexts(), 2, ActionSpace::Rec)) {
    worst = std::max(worst, std::abs(policy_value(env, p) -
                                     policy_value(env, Policy{p.assignment, ActionSpace::Trt})));
  }
  return {worst <= 1e-12, fmt("max |V_rec - V_str| = %.3g", worst)};
}

// P(X >= k) for X ~ Binomial(n, p).
double binomial_upper_tail(int n, int k, double p) {
  double tail = 0.0;
  for (int i = k; i <= n; ++i) {
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                     i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return tail;
}

struct AuditResult {
  int violating_seeds = 0;
  long certified_checks = 0;
  long prop3_violations = 0;
};

AuditResult concentration_audit() {
  const Environment env = build_scenario("strong_iv_easy");
  const int s = env.num_contexts();
  std::vector<Matrix> p_true;
  std::vector<Vector> g_true;
  std::vector<Vector> mu_true;
  for (int w = 0; w < s; ++w) {
    p_true.push_back(compliance_matrix(env, w));
    g_true.push_back(itt_means(env, w));
    mu_true.push_back(structural_means(env, w));
  }
  AuditResult out;
  for (int seed = 0; seed < kAuditSeeds; ++seed) {
    bool event = true;
    struct Certified {
      double inv_hat;
      double inv_true;
      double err;
      double c;
    };
    std::vector<Certified> certified;
    const PhaseObserver observer = [&](const PhaseSnapshot& snap) {
      for (int w = 0; w < s; ++w) {
        if (std::abs(snap.stats.nu_hat(w) - env.context_probs()[w]) > snap.radii.d[w]) event = false;
        const Matrix ph = snap.stats.p_hat(w);
        for (int z = 0; z < env.num_recommendations(); ++z) {
          if (!snap.stats.row_defined(w, z)) continue;
          if ((ph.row(z) - p_true[w].row(z)).cwiseAbs().sum() > snap.radii.a_at(w, z)) event = false;
          if (std::abs(*snap.stats.g_hat(w, z) - g_true[w](z)) > snap.radii.b_at(w, z)) event = false;
        }
        if (!snap.local.certified[w]) continue;
        const PluginEstimate& plug = *snap.local.plugin[w];
        certified.push_back({*snap.local.inv_norm[w], inf_norm(p_true[w].inverse()),
                             (plug.mu - mu_true[w]).cwiseAbs().maxCoeff(), plug.half_width});
      }
    };
    Rng rng(cell_stream_seed("strong_iv_easy", seed));
    run_brace(Objective::Inf, env, kAuditHorizon, 0.05, rng, observer);
    if (!event) {
      ++out.violating_seeds;
      continue;
    }
    for (const auto& c : certified) {
      ++out.certified_checks;
      if (c.inv_true > 2 * c.inv_hat || c.err > c.c) ++out.prop3_violations;
    }
  }
  return out;
}

Outcome lemma2(const AuditResult& a) {
  const double rate = double(a.violating_seeds) / kAuditSeeds;
  const double pvalue = binomial_upper_tail(kAuditSeeds, a.violating_seeds, 0.05);
  return {pvalue > 0.05, fmt("%d/%d seeds with a radius violation (rate %.3f, one-sided p = %.3g)",
                             a.violating_seeds, kAuditSeeds, rate, pvalue)};
}

Outcome prop3(const AuditResult& a) {
  return {a.prop3_violations == 0 && a.certified_checks > 0,
          fmt("%ld violations over %ld certified (phase, context) checks", a.prop3_violations,
              a.certified_checks)};
}

Outcome commit_correctness(const Grid& g) {
  int rec_commits = 0, rec_wrong = 0, trt_stops = 0, trt_wrong = 0;
  for (const auto& name : scenario_names()) {
    const auto d = diagnostics(build_scenario(name));
    if (d.rec_gap > 0) {
      for (const char* algo : {"brace_rec", "brace_rec_fast", "recert"}) {
        for (const auto& r : g.rows(name, algo)) {
          rec_commits += r.commit_time.has_value();
          rec_wrong += r.wrong_nonabstain;
        }
      }
    }
    if (d.homogeneous && d.invertible) {
      for (const char* algo : {"brace_trt", "brace_trt_fast", "brace_trt_partial"}) {
        for (const auto& r : g.rows(name, algo)) {
          trt_stops += !r.abstained;
          trt_wrong += r.wrong_nonabstain;
        }
      }
      for (const auto& r : g.rows(name, "recert")) {
        trt_stops += !r.trt_abstained.value_or(true);
        trt_wrong += r.trt_wrong_nonabstain.value_or(false);
      }
    }
  }
  return {rec_wrong == 0 && trt_wrong == 0,
          fmt("REC commits %d (wrong %d); TRT stops %d (wrong %d)", rec_commits, rec_wrong, trt_stops,
              trt_wrong)};
}

Outcome inf_coverage(const Grid& g) {
  int runs = 0, covered = 0;
  std::string missed;
  for (const auto& name : scenario_names()) {
    if (!scenario_spec(name).homogeneous) continue;
    for (const char* algo : {"brace_inf", "brace_inf_partial"}) {
      for (const auto& r : g.rows(name, algo)) {
        ++runs;
        if (r.coverage_ok.value_or(false)) {
          ++covered;
        } else {
          missed += fmt(" %s/%s/%llu", name.c_str(), algo, (unsigned long long)r.seed);
        }
      }
    }
  }
  return {runs > 0 && covered == runs,
          fmt("%d/%d homogeneous-scenario runs covered every policy at every phase", covered, runs) +
              missed};
}

Outcome weak_id(const Grid& g) {
  bool ok = true;
  std::string detail;
  for (const char* sc : {"weak_iv_abstain", "weak_iv_small_gap"}) {
    for (const char* algo : {"brace_trt", "brace_trt_fast"}) {
      const int n = g.count(sc, algo, [](const MetricsRow& r) { return r.abstained; });
      ok = ok && n == kSeeds;
      detail += fmt("%s %s abstain %d/%d; ", algo, sc, n, kSeeds);
    }
  }
  for (const char* algo : {"2sls_epsilon_decay", "2sls_fixed", "2sls_adaptive"}) {
    const int n = g.count("weak_iv_small_gap", algo, [](const MetricsRow& r) { return r.wrong_nonabstain; });
    ok = ok && n > 0;
    detail += fmt("%s wrong %d/%d; ", algo, n, kSeeds);
  }
  return {ok, detail};
}

Outcome deployments(const Grid& g) {
  auto correct = [](const MetricsRow& r) { return !r.abstained && !r.wrong_nonabstain; };
  const int strong = g.count("strong_iv_easy", "brace_trt", correct);
  const int rect = g.count("rect_overidentified", "brace_trt", correct);
  const int wf = g.count("workflow_redesign", "brace_trt", correct);
  const int rescued = g.count("weak_iv_rescued", "brace_trt_partial", correct);
  return {strong == kSeeds && rect == kSeeds && wf >= 9 && rescued == kSeeds,
          fmt("brace_trt strong_iv_easy %d/10, rect_overidentified %d/10, workflow_redesign %d/10; "
              "brace_trt_partial weak_iv_rescued %d/10",
              strong, rect, wf, rescued)};
}

Outcome widths(const Grid& g) {
  auto width = [](const MetricsRow& r) { return r.final_interval_width.value_or(NAN); };
  const double weak = g.mean("weak_iv_abstain", "brace_inf", width);
  const double rect = g.mean("rect_overidentified", "brace_inf", width);
  const double rect_partial = g.mean("rect_overidentified", "brace_inf_partial", width);
  const double rescued = g.mean("weak_iv_rescued", "brace_inf_partial", width);

  const Environment sub = rescued_square_subdesign();
  const long horizon = scenario_spec("weak_iv_rescued").default_horizon;
  double sub_width = 0.0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(cell_stream_seed("weak_iv_rescued", seed));
    const RunTrace trace = run_brace(Objective::Inf, sub, horizon, kDefaultDelta, rng);
    sub_width += *compute_metrics(sub, trace, algorithm_info("brace_inf")).final_interval_width;
  }
  sub_width /= kSeeds;
  return {weak > rect && rect > rect_partial && rescued < 0.5 * sub_width,
          fmt("weak_iv_abstain %.4f > rect square %.4f > rect partial %.4f; "
              "rescued partial %.4f < 0.5 x square sub-design %.4f",
              weak, rect, rect_partial, rescued, sub_width)};
}

Outcome trap(const Grid& g) {
  auto at = [](double v) { return [v](const MetricsRow& r) { return near(r.estimated_primary_value, v); }; };
  const int actual = g.count("actual_treatment_trap", "actual_ucb", at(0.66));
  const int comply = g.count("actual_treatment_trap", "comply_ucb", at(0.66));
  const int thompson = g.count("actual_treatment_trap", "thompson", at(0.81));
  const int chosen = g.count("actual_treatment_trap", "chosen_ucb", at(0.81));
  return {actual >= 8 && comply >= 8 && thompson >= 8 && chosen >= 8,
          fmt("actual_ucb 0.66 in %d/10, comply_ucb 0.66 in %d/10, thompson 0.81 in %d/10, "
              "chosen_ucb 0.81 in %d/10",
              actual, comply, thompson, chosen)};
}

Outcome homogeneity_split(const Grid& g) {
  const char* sc = "homogeneity_violation";
  const int rec = g.count(sc, "recert", [](const MetricsRow& r) { return near(r.estimated_primary_value, 0.95); });
  const int abstain = g.count(sc, "recert", [](const MetricsRow& r) { return r.trt_abstained.value_or(false); });
  bool ok = rec >= 9 && abstain == kSeeds;
  std::string detail = fmt("recert REC 0.95 in %d/10, structural abstain %d/10; ", rec, abstain);
  for (const char* algo : {"2sls_epsilon_decay", "2sls_fixed", "2sls_adaptive"}) {
    const int n = g.count(sc, algo, [](const MetricsRow& r) { return near(r.estimated_primary_value, 0.45); });
    ok = ok && n >= 8;
    detail += fmt("%s 0.45 in %d/10; ", algo, n);
  }
  return {ok, detail};
}

Outcome orthoscore() {
  const OrthoReport r = verify_orthoscore(0, 100);
  return {r.pass(), fmt("%zu identity rows max diff %.3g; double-robust max %.3g; scaling max |ratio-4| %.3g",
                        r.identity.size(), r.max_identity_diff(), r.max_double_robust(),
                        r.max_scaling_error())};
}

Outcome regret_order(const Grid& g) {
  auto regret = [](const MetricsRow& r) { return r.operational_regret; };
  const double base = g.mean("strong_iv_easy", "brace_rec", regret);
  const double fast = g.mean("strong_iv_easy", "brace_rec_fast", regret);
  const double actual = g.mean("strong_iv_easy", "actual_ucb", regret);
  return {base > fast && fast > actual,
          fmt("brace_rec %.2f > brace_rec_fast %.2f > actual_ucb %.2f", base, fast, actual)};
}

std::string serialize(const CellResult& cell) {
  std::ostringstream os;
  write_jsonl(os, cell.trace);
  write_csv(os, {cell.row});
  return os.str();
}

Outcome determinism() {
  int cells = 0, same = 0;
  for (const char* sc : {"strong_iv_easy", "rect_overidentified", "weak_iv_rescued", "private_signal"}) {
    for (const auto& a : algorithms()) {
      ++cells;
      same += serialize(run_cell(sc, a.name, 3)) == serialize(run_cell(sc, a.name, 3));
    }
  }
  return {same == cells, fmt("%d/%d cells byte-identical on re-run", same, cells)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };
  report(1, "oracle exactness", oracle_exactness());
  report(2, "REC/TRT collapse under direct control", collapse());
  const AuditResult audit = concentration_audit();
  report(3, "simultaneous concentration audit", lemma2(audit));
  report(4, "certified inversion audit", prop3(audit));
  const Grid grid;
  for (const auto& f : grid.result().failures) std::printf("  row invariant: %s\n", f.c_str());
  report(5, "commit and stop correctness", commit_correctness(grid));
  report(6, "INF coverage", inf_coverage(grid));
  report(7, "abstention under weak identification", weak_id(grid));
  report(8, "structural deployment successes", deployments(grid));
  report(9, "interval width orderings", widths(grid));
  report(10, "actual-treatment trap", trap(grid));
  report(11, "homogeneity-failure split", homogeneity_split(grid));
  report(12, "orthogonal score identity", orthoscore());
  report(13, "regret ordering on strong_iv_easy", regret_order(grid));
  report(14, "determinism", determinism());
  if (!grid.result().failures.empty()) ++failed;
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
