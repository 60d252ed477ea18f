#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "brace/harness.hpp"

namespace brace {

struct PlotSpec {
  std::string name;    // output file stem
  Track track;
  std::string metric;  // CSV metric averaged over seeds
  std::string y_label;
};

const std::vector<PlotSpec>& plot_specs();

// Grouped bars: one group per scenario, one bar per algorithm of the track.
// Returns false (and writes nothing) when no aggregate matches.
bool render_bar_chart(std::ostream& os, const PlotSpec& spec, const std::vector<Aggregate>& aggregates);

// Writes <name>.svg for every plot with data; missing metrics are reported on
// `warnings`. Returns the files written.
std::vector<std::filesystem::path> emit_plots(const std::vector<Aggregate>& aggregates,
                                              const std::filesystem::path& out_dir,
                                              std::ostream& warnings);

}  // namespace brace
