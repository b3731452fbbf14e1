#pragma once

#include <utility>
#include <vector>

#include "ttfilter/nll.hpp"
#include "ttfilter/optimizer.hpp"

namespace tt {

/// Ordered (target, sensor) pairs removed from the Hessian repair problem.
struct ExclusionList {
  std::vector<std::pair<int, int>> pairs;

  bool contains(int target, int sensor) const;
  std::vector<int> targets() const;  // unique, ascending
  std::vector<int> sensors() const;  // unique, ascending
};

struct HessianRepair {
  Mat hessian;      // 2C x 2C, positive definite
  Vec x_ml;         // estimate after any re-optimization
  ExclusionList exclusions;
};

/// Restore positive definiteness of the combined-NLL Hessian at x_ml by
/// excluding the closest target-sensor pairs, re-optimizing the remaining
/// targets without the excluded sensors, and giving each excluded target a
/// fixed d0^-2 * I block. Throws NumericalError if every target ends up
/// excluded.
HessianRepair repair_hessian(const Vec& x_ml, const MeasurementFrame& frame, const SensorGrid& grid,
                             const MeasurementModel& mm, const PropagatedPrior& prior, const BoxConstraints& box,
                             const OptimizerOptions& opts = {}, bool use_measurements = true);

}  // namespace tt
