#pragma once

#include <span>
#include <vector>

#include "brace/estimation.hpp"

namespace brace {

// One moment restriction |coeffs . mu - target| <= slack.
struct MomentRow {
  Eigen::RowVectorXd coeffs;
  double target = 0.0;
  double slack = 0.0;
};

struct PartialIdResult {
  std::vector<Interval> bounds;  // per treatment
  bool infeasible = false;
};

// Sharp coordinate bounds of F = {mu in [0,1]^K : every row holds}. The
// polytope is bounded, so its extremes are attained at vertices; these are
// enumerated directly (K <= 3 in practice). An empty F yields [0,1] bounds and
// the infeasible flag.
PartialIdResult partial_id_box(std::span<const MomentRow> rows, int num_treatments);

// Convenience for a single treatment coordinate.
PartialIdResult partial_id_interval(std::span<const MomentRow> rows, int num_treatments, int x);

// Rows for context w: every recommendation with N >= 1 contributes
// |P̂_z . mu - ĝ_z| <= a_z + b_z.
std::vector<MomentRow> moment_rows(const PhaseStats& stats, const Radii& radii, int w);

}  // namespace brace
