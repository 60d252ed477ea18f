#include "brace/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "brace/baselines.hpp"
#include "brace/brace.hpp"
#include "brace/environment_json.hpp"
#include "brace/scenarios.hpp"

namespace brace {

RunTrace run_algorithm(const std::string& algorithm, const Environment& env, long horizon,
                       double delta, Rng& rng) {
  if (algorithm == "brace_rec") return run_brace(Objective::Rec, env, horizon, delta, rng);
  if (algorithm == "brace_rec_fast") return run_brace_fast(Objective::Rec, env, horizon, delta, rng);
  if (algorithm == "brace_trt") return run_brace(Objective::Trt, env, horizon, delta, rng);
  if (algorithm == "brace_trt_fast") return run_brace_fast(Objective::Trt, env, horizon, delta, rng);
  if (algorithm == "brace_trt_partial") {
    return run_brace_partial(Objective::Trt, env, horizon, delta, rng);
  }
  if (algorithm == "brace_inf") return run_brace(Objective::Inf, env, horizon, delta, rng);
  if (algorithm == "brace_inf_partial") {
    return run_brace_partial(Objective::Inf, env, horizon, delta, rng);
  }
  if (algorithm == "recert") return run_recert(env, horizon, delta, rng);
  if (algorithm == "chosen_ucb") return run_chosen_ucb(env, horizon, rng);
  if (algorithm == "thompson") return run_thompson(env, horizon, rng);
  if (algorithm == "actual_ucb") return run_actual_ucb(env, horizon, rng);
  if (algorithm == "comply_ucb") return run_comply_ucb(env, horizon, rng);
  if (algorithm == "2sls_epsilon_decay") {
    return run_2sls(TslsSchedule::EpsilonDecay, env, horizon, rng);
  }
  if (algorithm == "2sls_fixed") return run_2sls(TslsSchedule::Fixed, env, horizon, rng);
  if (algorithm == "2sls_adaptive") return run_2sls(TslsSchedule::Adaptive, env, horizon, rng);
  algorithm_info(algorithm);  // throws with the list of names
  throw std::invalid_argument("unhandled algorithm " + algorithm);
}

std::uint64_t cell_stream_seed(const std::string& scenario, std::uint64_t seed) {
  return mix64(hash_string(scenario) ^ mix64(seed));
}

CellResult run_cell(const std::string& scenario, const std::string& algorithm, std::uint64_t seed,
                    long horizon, double delta) {
  const AlgorithmInfo& info = algorithm_info(algorithm);
  const ScenarioSpec& spec = scenario_spec(scenario);
  const Environment env = build_scenario(scenario);
  const long h = horizon > 0 ? horizon : spec.default_horizon;

  CellResult cell;
  cell.row.scenario = scenario;
  cell.row.algorithm = algorithm;
  cell.row.seed = seed;
  cell.row.horizon = h;
  cell.row.delta = delta;
  if (info.structural && env.num_recommendations() < env.num_treatments()) {
    cell.skipped = "structural objective needs K_z >= K_x";
    return cell;
  }
  try {
    Rng rng(cell_stream_seed(scenario, seed));
    cell.trace = run_algorithm(algorithm, env, h, delta, rng);
    cell.trace.algorithm = algorithm;
    cell.trace.scenario = scenario;
    cell.trace.seed = seed;
    cell.trace.horizon = h;
    cell.trace.delta = delta;
    cell.row = compute_metrics(env, cell.trace, info);
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

namespace {

bool cell_less(const CellResult& a, const CellResult& b) {
  return std::tie(a.row.scenario, a.row.algorithm, a.row.seed) <
         std::tie(b.row.scenario, b.row.algorithm, b.row.seed);
}

std::string cell_key(const MetricsRow& row) {
  return row.scenario + "/" + row.algorithm + "/" + std::to_string(row.seed);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SuiteResult run_suite(const SuiteConfig& config) {
  for (const auto& s : config.scenarios) scenario_spec(s);
  for (const auto& a : config.algorithms) algorithm_info(a);

  struct Job {
    std::string scenario;
    std::string algorithm;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& s : config.scenarios) {
    for (const auto& a : config.algorithms) {
      for (int i = 0; i < config.seeds; ++i) {
        jobs.push_back({s, a, config.first_seed + static_cast<std::uint64_t>(i)});
      }
    }
  }

  SuiteResult result;
  result.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      CellResult cell = run_cell(jobs[i].scenario, jobs[i].algorithm, jobs[i].seed, config.horizon,
                                 config.delta);
      if (!config.keep_traces) cell.trace.rounds.clear();
      result.cells[i] = std::move(cell);
    }
  };
  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::sort(result.cells.begin(), result.cells.end(), cell_less);
  for (const auto& cell : result.cells) {
    if (cell.error) result.failures.push_back(cell_key(cell.row) + ": " + *cell.error);
    if (cell.skipped || cell.error) continue;
    for (const auto& f : row_invariant_failures(cell.row)) {
      result.failures.push_back(cell_key(cell.row) + ": " + f);
    }
  }
  return result;
}

void write_csv_header(std::ostream& os) { os << "scenario,algorithm,seed,horizon,delta,metric,value\n"; }

void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows) {
  write_csv_header(os);
  for (const auto& row : rows) {
    for (const auto& [metric, value] : row.metrics()) {
      os << row.scenario << ',' << row.algorithm << ',' << row.seed << ',' << row.horizon << ','
         << format_double(row.delta) << ',' << metric << ',' << format_double(value) << '\n';
    }
  }
}

void write_suite(const SuiteResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<MetricsRow> rows;
  for (const auto& cell : result.cells) {
    if (!cell.skipped && !cell.error) rows.push_back(cell.row);
  }
  {
    std::ofstream csv(out_dir / "metrics.csv", std::ios::binary);
    write_csv(csv, rows);
  }
  {
    std::ofstream jsonl(out_dir / "traces.jsonl", std::ios::binary);
    for (const auto& cell : result.cells) {
      if (!cell.skipped && !cell.error) write_jsonl(jsonl, cell.trace);
    }
  }
  const auto skipped = out_dir / "skipped.csv";
  std::filesystem::remove(skipped);
  bool any = false;
  for (const auto& cell : result.cells) any = any || cell.skipped || cell.error;
  if (any) {
    std::ofstream os(skipped, std::ios::binary);
    os << "scenario,algorithm,seed,reason\n";
    for (const auto& cell : result.cells) {
      if (!cell.skipped && !cell.error) continue;
      os << cell.row.scenario << ',' << cell.row.algorithm << ',' << cell.row.seed << ",\""
         << (cell.skipped ? *cell.skipped : "error: " + *cell.error) << "\"\n";
    }
  }
}

std::vector<CsvRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "scenario,algorithm,seed,horizon,delta,metric,value") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<CsvRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 7) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 7 fields");
    }
    try {
      out.push_back({fields[0], fields[1], std::stoull(fields[2]), std::stol(fields[3]),
                     std::stod(fields[4]), fields[5], std::stod(fields[6])});
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return out;
}

std::vector<Aggregate> aggregate(const std::vector<CsvRecord>& records) {
  std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, int>> acc;
  for (const auto& r : records) {
    auto& [sum, n] = acc[{r.scenario, r.algorithm, r.metric}];
    sum += r.value;
    ++n;
  }
  std::vector<Aggregate> out;
  for (const auto& [key, v] : acc) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v.first / v.second, v.second});
  }
  return out;
}

namespace {

struct TrackColumns {
  Track track;
  std::vector<std::string> metrics;
};

const std::vector<TrackColumns>& summary_columns() {
  static const std::vector<TrackColumns> cols = {
      {Track::Rec, {"estimated_primary_value", "operational_regret", "abstained"}},
      {Track::Trt, {"estimated_primary_value", "abstained", "wrong_nonabstain"}},
      {Track::Inf, {"coverage_ok", "certified_share", "final_interval_width"}},
      {Track::Recert, {"estimated_primary_value", "trt_abstained", "trt_estimate", "trt_candidate_value",
                        "trt_interval_width"}},
  };
  return cols;
}

}  // namespace

void print_summary(std::ostream& os, const std::vector<Aggregate>& aggregates) {
  std::map<std::tuple<std::string, std::string, std::string>, double> means;
  std::vector<std::pair<std::string, std::string>> cells;
  for (const auto& a : aggregates) {
    means[{a.scenario, a.algorithm, a.metric}] = a.mean;
    if (cells.empty() || cells.back() != std::make_pair(a.scenario, a.algorithm)) {
      cells.emplace_back(a.scenario, a.algorithm);
    }
  }
  for (const auto& cols : summary_columns()) {
    bool header = false;
    for (const auto& [scenario, algorithm] : cells) {
      if (algorithm_info(algorithm).track != cols.track) continue;
      if (!header) {
        os << "\n[" << to_string(cols.track) << " track]\n";
        os << std::left << std::setw(24) << "scenario" << std::setw(20) << "algorithm";
        for (const auto& m : cols.metrics) os << std::setw(std::max<int>(12, m.size() + 2)) << m;
        os << '\n';
        header = true;
      }
      os << std::left << std::setw(24) << scenario << std::setw(20) << algorithm;
      for (const auto& m : cols.metrics) {
        const auto it = means.find({scenario, algorithm, m});
        std::ostringstream cell;
        if (it == means.end()) {
          cell << "-";
        } else {
          cell << std::fixed << std::setprecision(4) << it->second;
        }
        os << std::setw(std::max<int>(12, m.size() + 2)) << cell.str();
      }
      os << '\n';
    }
  }
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> vector_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

const char* comparison_symbol(Comparison c) {
  switch (c) {
    case Comparison::Equal:
      return "==";
    case Comparison::AtLeast:
      return ">=";
    case Comparison::AtMost:
      return "<=";
  }
  return "?";
}

}  // namespace

bool oracle_report(std::ostream& os, const std::string& scenario, bool json) {
  const ScenarioSpec& spec = scenario_spec(scenario);
  const Environment env = build_scenario(scenario);
  const EnvDiagnostics diag = diagnostics(env);
  const VerificationReport verification = verify_scenario(env, spec);

  nlohmann::json doc;
  doc["scenario"] = scenario;
  doc["description"] = spec.description;
  doc["default_horizon"] = spec.default_horizon;
  doc["environment"] = environment_to_json(env);
  nlohmann::json contexts = nlohmann::json::array();
  for (int w = 0; w < env.num_contexts(); ++w) {
    contexts.push_back({{"w", w},
                        {"nu", env.context_probs()[w]},
                        {"P", matrix_json(compliance_matrix(env, w))},
                        {"g", vector_std(itt_means(env, w))},
                        {"mu", vector_std(structural_means(env, w))}});
  }
  doc["contexts"] = contexts;
  nlohmann::json policies = nlohmann::json::array();
  for (const auto& p : enumerate_policies(env.num_contexts(), env.num_recommendations(), ActionSpace::Rec)) {
    policies.push_back({{"policy", to_string(p)}, {"value", policy_value(env, p)}});
  }
  for (const auto& p : enumerate_policies(env.num_contexts(), env.num_treatments(), ActionSpace::Trt)) {
    policies.push_back({{"policy", to_string(p)}, {"value", policy_value(env, p)}});
  }
  doc["policies"] = policies;
  doc["diagnostics"] = {{"rec_opt", to_string(diag.rec_opt)},
                        {"rec_opt_value", diag.rec_opt_value},
                        {"str_opt", to_string(diag.str_opt)},
                        {"str_opt_value", diag.str_opt_value},
                        {"rec_gap", diag.rec_gap},
                        {"str_gap", diag.str_gap},
                        {"inv_norm_max", diag.inv_norm_max ? nlohmann::json(*diag.inv_norm_max)
                                                           : nlohmann::json(nullptr)},
                        {"nu_min", diag.nu_min},
                        {"homogeneous", diag.homogeneous},
                        {"invertible", diag.invertible}};
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& c : verification.checks) {
    targets.push_back({{"name", c.name},
                       {"comparison", comparison_symbol(c.comparison)},
                       {"expected", c.expected},
                       {"actual", c.actual},
                       {"pass", c.pass}});
  }
  doc["targets"] = targets;
  doc["pass"] = verification.pass();

  if (json) {
    os << doc.dump(2) << '\n';
    return verification.pass();
  }

  os << "scenario " << scenario << ": " << spec.description << '\n';
  os << "S=" << env.num_contexts() << " K_z=" << env.num_recommendations()
     << " K_x=" << env.num_treatments() << " default horizon " << spec.default_horizon << "\n\n";
  os << std::setprecision(6);
  for (int w = 0; w < env.num_contexts(); ++w) {
    os << "context " << w << "  nu=" << env.context_probs()[w] << '\n';
    const Matrix p = compliance_matrix(env, w);
    const Vector g = itt_means(env, w);
    for (Eigen::Index z = 0; z < p.rows(); ++z) {
      os << "  P[z=" << z << "] =";
      for (Eigen::Index x = 0; x < p.cols(); ++x) os << ' ' << p(z, x);
      os << "   g=" << g(z) << '\n';
    }
    os << "  mu =";
    const Vector mu = structural_means(env, w);
    for (Eigen::Index x = 0; x < mu.size(); ++x) os << ' ' << mu(x);
    os << '\n';
  }
  os << "\npolicies\n";
  for (const auto& p : policies) {
    os << "  " << std::left << std::setw(24) << p["policy"].get<std::string>()
       << p["value"].get<double>() << '\n';
  }
  os << "\nbest REC " << to_string(diag.rec_opt) << " = " << diag.rec_opt_value << "  gap "
     << diag.rec_gap << '\n';
  os << "best TRT " << to_string(diag.str_opt) << " = " << diag.str_opt_value << "  gap "
     << diag.str_gap << '\n';
  os << "L = " << (diag.inv_norm_max ? std::to_string(*diag.inv_norm_max) : std::string("n/a"))
     << "  nu_min = " << diag.nu_min << "  homogeneous = " << (diag.homogeneous ? "yes" : "no")
     << "  invertible = " << (diag.invertible ? "yes" : "no") << "\n\ntargets\n";
  for (const auto& c : verification.checks) {
    os << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << ' ' << comparison_symbol(c.comparison)
       << ' ' << c.expected << "  (actual " << c.actual << ")\n";
  }
  return verification.pass();
}

}  // namespace brace
