#pragma once

#include <functional>
#include <vector>

#include "ttfilter/nll.hpp"
#include "ttfilter/types.hpp"

namespace tt {

struct BoxConstraints {
  Vec lower;
  Vec upper;

  Vec project(const Vec& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
  bool contains(const Vec& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
  /// Grid extent widened by `margin` on every side, replicated for C targets.
  static BoxConstraints around_grid(const SensorGrid& grid, int targets, double margin);
};

struct OptimizerOptions {
  double gradient_tolerance = 1e-6;  // projected-gradient infinity norm
  int max_iterations = 200;
  double initial_radius = 10.0;      // trust radius, meters
  double max_radius = 100.0;
};

struct OptimizeResult {
  Vec x_ml;
  double nll_value = 0.0;
  int iterations = 0;
  bool converged = false;
  double projected_gradient_norm = 0.0;
  std::vector<int> active_set;
};

/// Twice-differentiable objective: a cheap value-only path for trial points
/// and a full path with gradient and Hessian.
struct Objective {
  std::function<double(const Vec&)> value;
  std::function<NllReport(const Vec&)> evaluate;

  static Objective from(const CombinedNll& nll);
};

/// Projected trust-region Newton minimization inside a box. Indefinite
/// Hessians are shifted (Levenberg style) until positive definite; a
/// projected-gradient backtracking step is the fallback when the Newton
/// step does not decrease the objective.
OptimizeResult minimize(const Objective& objective, const Vec& x0, const BoxConstraints& box,
                        const OptimizerOptions& opts = {});

/// Infinity norm of x - P(x - g).
double projected_gradient_norm(const Vec& x, const Vec& grad, const BoxConstraints& box);

}  // namespace tt
