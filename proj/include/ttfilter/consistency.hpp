#pragma once

#include <array>
#include <vector>

#include "ttfilter/nll.hpp"
#include "ttfilter/optimizer.hpp"

namespace tt {

struct ConsistencyConfig {
  double p_value = 0.0013;
  int n_bad_tgt = 2;
  int n_bad_sq = 12;
  int max_subsets = 66;

  void validate(int targets, int squares) const;
};

/// Upper-tail chi-squared quantile: P(chi2_dof > q) = p_value.
double chi2_threshold(int dof, double p_value);

struct ConsistencyCheck {
  bool consistent = false;
  double statistic = 0.0;  // sum_s (alpha_s - a_s)^2 / sigma_s^2
  double threshold = 0.0;
};

ConsistencyCheck is_consistent(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                               const MeasurementModel& mm, const ConsistencyConfig& cfg);

/// Result of a recovery procedure. `passed` reports the final gate check.
struct RecoveryResult {
  OptimizeResult result;
  ConsistencyCheck check;
  bool passed = false;
  int candidates_tried = 0;
};

/// Sensors on the outer rows and columns of the grid, ascending index.
std::vector<int> boundary_sensors(const SensorGrid& grid);

/// Candidate sensor whose minimum distance to the target estimates is
/// largest; ties go to the earlier candidate.
int maximin_sensor(const std::vector<int>& candidates, const Vec& positions, const SensorGrid& grid);

/// Start from boundary sensors only, then add maximin sensors one at a time,
/// re-optimizing after each addition. Starts from the prior mean.
RecoveryResult one_by_one_recovery(const MeasurementFrame& frame, const SensorGrid& grid, const MeasurementModel& mm,
                                   const PropagatedPrior& prior, const BoxConstraints& box,
                                   const ConsistencyConfig& cfg, const OptimizerOptions& opts = {});

/// Per-target signal excess: how much positive (predicted - observed)
/// signal disappears when target c is removed,
/// sum_s [max(alpha_s - a_s, 0) - max(alpha_s - a_s - f_{s,c}, 0)].
Vec signal_excess(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                  const MeasurementModel& mm);

/// Per-sensor deficit max(a_s - alpha~_s, 0), where alpha~ omits `removed` targets.
Vec signal_deficit(const Vec& positions, const std::vector<int>& removed, const MeasurementFrame& frame,
                   const SensorGrid& grid, const MeasurementModel& mm);

struct GridSquare {
  int index = 0;
  std::array<int, 4> corners{};
  Vec2 center = Vec2::Zero();
};

/// Every cell of the sensor grid, row-major.
std::vector<GridSquare> grid_squares(const SensorGrid& grid);

/// Indices of the `count` largest entries (descending, ties by lower index).
std::vector<int> top_indices(const Vec& values, int count);

/// Size-k subsets of {0..n-1} in lexicographic order, at most `cap` of them.
std::vector<std::vector<int>> ordered_subsets(int n, int k, int cap);

/// Relocate the worst-excess targets to the centers of high-deficit grid
/// squares and re-optimize, returning the first candidate that passes the
/// gate, or the lowest-NLL candidate (never worse than the input).
RecoveryResult square_hopping_recovery(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                                       const MeasurementModel& mm, const PropagatedPrior& prior,
                                       const BoxConstraints& box, const ConsistencyConfig& cfg,
                                       const OptimizerOptions& opts = {});

}  // namespace tt
