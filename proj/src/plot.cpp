#include "brace/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace brace {

const std::vector<PlotSpec>& plot_specs() {
  static const std::vector<PlotSpec> specs = {
      {"rec_mean_estimated_primary_value", Track::Rec, "estimated_primary_value", "mean REC value"},
      {"rec_mean_operational_regret", Track::Rec, "operational_regret", "mean operational regret"},
      {"trt_mean_estimated_primary_value", Track::Trt, "estimated_primary_value", "mean TRT value"},
      {"trt_abstention_rate", Track::Trt, "abstained", "abstention rate"},
      {"trt_wrong_nonabstain_rate", Track::Trt, "wrong_nonabstain", "wrong-non-abstain rate"},
      {"inf_coverage_rate", Track::Inf, "coverage_ok", "coverage rate"},
      {"inf_mean_certified_share", Track::Inf, "certified_share", "mean certified share"},
      {"inf_mean_interval_width", Track::Inf, "final_interval_width", "mean interval width"},
      {"recert_mean_rec_deployed_value", Track::Recert, "estimated_primary_value",
       "mean deployed REC value"},
      {"recert_trt_abstention_rate", Track::Recert, "trt_abstained", "structural abstention rate"},
      {"recert_mean_trt_interval_width", Track::Recert, "trt_interval_width",
       "mean TRT interval width"},
  };
  return specs;
}

namespace {

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
                          "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Round the axis top up to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
  if (v <= 0.0) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * p >= v) return m * p;
  }
  return 10.0 * p;
}

}  // namespace

bool render_bar_chart(std::ostream& os, const PlotSpec& spec, const std::vector<Aggregate>& aggregates) {
  std::vector<std::string> scenarios;
  std::vector<std::string> algos;
  std::map<std::pair<std::string, std::string>, double> value;
  for (const auto& a : aggregates) {
    if (a.metric != spec.metric || algorithm_info(a.algorithm).track != spec.track) continue;
    if (std::find(scenarios.begin(), scenarios.end(), a.scenario) == scenarios.end()) {
      scenarios.push_back(a.scenario);
    }
    if (std::find(algos.begin(), algos.end(), a.algorithm) == algos.end()) algos.push_back(a.algorithm);
    value[{a.scenario, a.algorithm}] = a.mean;
  }
  if (value.empty()) return false;
  std::sort(scenarios.begin(), scenarios.end());
  // Keep the catalog order of algorithms.
  std::vector<std::string> ordered;
  for (const auto& info : algorithms()) {
    if (std::find(algos.begin(), algos.end(), info.name) != algos.end()) ordered.push_back(info.name);
  }

  double lo = 0.0;
  double hi = 0.0;
  for (const auto& [k, v] : value) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double top = nice_ceiling(hi);
  const double bottom = lo < 0.0 ? -nice_ceiling(-lo) : 0.0;

  const double bar_w = 14.0;
  const double group_gap = 24.0;
  const double left = 70.0;
  const double right = 190.0;
  const double plot_top = 40.0;
  const double plot_h = 260.0;
  const double group_w = bar_w * ordered.size() + group_gap;
  const double width = left + group_w * scenarios.size() + right;
  const double height = plot_top + plot_h + 130.0;
  auto y_of = [&](double v) { return plot_top + plot_h * (top - v) / (top - bottom); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
     << spec.name << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = bottom + (top - bottom) * i / 4.0;
    const double y = y_of(v);
    os << "<line x1=\"" << num(left) << "\" x2=\"" << num(width - right) << "\" y1=\"" << num(y)
       << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
       << label(v) << "</text>\n";
  }
  os << "<text transform=\"translate(16," << num(plot_top + plot_h / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << spec.y_label << "</text>\n";

  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const double gx = left + group_gap / 2 + group_w * s;
    for (std::size_t a = 0; a < ordered.size(); ++a) {
      const auto it = value.find({scenarios[s], ordered[a]});
      if (it == value.end()) continue;
      const double y0 = y_of(0.0);
      const double y1 = y_of(it->second);
      os << "<rect x=\"" << num(gx + bar_w * a) << "\" y=\"" << num(std::min(y0, y1))
         << "\" width=\"" << num(bar_w - 2) << "\" height=\"" << num(std::abs(y1 - y0))
         << "\" fill=\"" << kPalette[a % std::size(kPalette)] << "\"><title>" << scenarios[s] << " / "
         << ordered[a] << ": " << label(it->second) << "</title></rect>\n";
    }
    const double cx = gx + bar_w * ordered.size() / 2;
    const double ly = plot_top + plot_h + 12;
    os << "<text transform=\"translate(" << num(cx) << "," << num(ly)
       << ") rotate(40)\" text-anchor=\"start\">" << scenarios[s] << "</text>\n";
  }
  os << "<line x1=\"" << num(left) << "\" x2=\"" << num(width - right) << "\" y1=\"" << num(y_of(0.0))
     << "\" y2=\"" << num(y_of(0.0)) << "\" stroke=\"black\"/>\n";

  for (std::size_t a = 0; a < ordered.size(); ++a) {
    const double x = width - right + 16;
    const double y = plot_top + 16.0 * a;
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"10\" height=\"10\" fill=\""
       << kPalette[a % std::size(kPalette)] << "\"/>\n";
    os << "<text x=\"" << num(x + 14) << "\" y=\"" << num(y + 9) << "\">" << ordered[a] << "</text>\n";
  }
  os << "</svg>\n";
  return true;
}

std::vector<std::filesystem::path> emit_plots(const std::vector<Aggregate>& aggregates,
                                              const std::filesystem::path& out_dir,
                                              std::ostream& warnings) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& spec : plot_specs()) {
    std::ostringstream svg;
    if (!render_bar_chart(svg, spec, aggregates)) {
      warnings << "warning: no data for " << spec.name << ", skipped\n";
      continue;
    }
    const auto path = out_dir / (spec.name + ".svg");
    std::ofstream(path, std::ios::binary) << svg.str();
    written.push_back(path);
  }
  return written;
}

}  // namespace brace
