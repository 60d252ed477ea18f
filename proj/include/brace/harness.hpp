#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "brace/metrics.hpp"

namespace brace {

inline constexpr double kDefaultDelta = 0.05;

// Runs one algorithm by name. Throws ContractError on a shape it cannot handle.
RunTrace run_algorithm(const std::string& algorithm, const Environment& env, long horizon,
                       double delta, Rng& rng);

// Seed of a cell's random stream. It depends on the scenario and seed but not
// on the algorithm, so algorithms compared on the same seed see the same
// context and compliance draws until their actions diverge.
std::uint64_t cell_stream_seed(const std::string& scenario, std::uint64_t seed);

struct CellResult {
  MetricsRow row;
  RunTrace trace;
  std::optional<std::string> skipped;  // reason when the combination is invalid
  std::optional<std::string> error;
};

// horizon <= 0 selects the scenario's default horizon.
CellResult run_cell(const std::string& scenario, const std::string& algorithm, std::uint64_t seed,
                    long horizon = 0, double delta = kDefaultDelta);

struct SuiteConfig {
  std::vector<std::string> scenarios;
  std::vector<std::string> algorithms;
  int seeds = 10;
  std::uint64_t first_seed = 0;
  long horizon = 0;  // 0 = per-scenario default
  double delta = kDefaultDelta;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool keep_traces = true;
};

struct SuiteResult {
  std::vector<CellResult> cells;  // sorted by (scenario, algorithm, seed)
  std::vector<std::string> failures;  // row invariant violations and run errors
};

SuiteResult run_suite(const SuiteConfig& config);

void write_csv_header(std::ostream& os);
void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
// Writes metrics.csv, traces.jsonl and skipped.csv (when anything was skipped).
void write_suite(const SuiteResult& result, const std::filesystem::path& out_dir);

struct CsvRecord {
  std::string scenario;
  std::string algorithm;
  std::uint64_t seed = 0;
  long horizon = 0;
  double delta = 0.0;
  std::string metric;
  double value = 0.0;
};

// Throws std::runtime_error on a malformed file.
std::vector<CsvRecord> read_csv(const std::filesystem::path& path);

// Mean of each (scenario, algorithm, metric) over seeds.
struct Aggregate {
  std::string scenario;
  std::string algorithm;
  std::string metric;
  double mean = 0.0;
  int count = 0;
};

std::vector<Aggregate> aggregate(const std::vector<CsvRecord>& records);

// Summary grouped by track.
void print_summary(std::ostream& os, const std::vector<Aggregate>& aggregates);

// Exact oracle description of a scenario. Returns whether every target holds.
bool oracle_report(std::ostream& os, const std::string& scenario, bool json);

}  // namespace brace
