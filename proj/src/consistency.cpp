#include "ttfilter/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

namespace tt {

void ConsistencyConfig::validate(int targets, int squares) const {
  if (!(p_value > 0.0 && p_value < 1.0)) throw ConfigError("p_value must lie in (0, 1)");
  if (n_bad_tgt < 1 || n_bad_tgt > targets) throw ConfigError("n_bad_tgt must be in [1, C]");
  if (n_bad_sq < 1 || n_bad_sq > squares) throw ConfigError("n_bad_sq must be in [1, number of grid squares]");
  if (max_subsets < 1) throw ConfigError("max_subsets must be positive");
}

double chi2_threshold(int dof, double p_value) {
  if (dof < 1) throw std::invalid_argument("chi-squared needs at least one degree of freedom");
  if (!(p_value > 0.0 && p_value < 1.0)) throw std::invalid_argument("p_value must lie in (0, 1)");
  const boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(boost::math::complement(dist, p_value));
}

ConsistencyCheck is_consistent(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                               const MeasurementModel& mm, const ConsistencyConfig& cfg) {
  ConsistencyCheck out;
  out.statistic = 2.0 * measurement_nll_value(positions, frame, grid, mm);
  out.threshold = chi2_threshold(grid.count(), cfg.p_value);
  out.consistent = out.statistic <= out.threshold;
  return out;
}

std::vector<int> boundary_sensors(const SensorGrid& grid) {
  std::vector<int> out;
  for (int r = 0; r < grid.rows; ++r)
    for (int c = 0; c < grid.cols; ++c)
      if (r == 0 || c == 0 || r == grid.rows - 1 || c == grid.cols - 1) out.push_back(grid.index(r, c));
  return out;
}

int maximin_sensor(const std::vector<int>& candidates, const Vec& positions, const SensorGrid& grid) {
  if (candidates.empty()) throw std::invalid_argument("maximin_sensor: no candidates");
  const int n_targets = static_cast<int>(positions.size() / 2);
  int best = candidates.front();
  double best_d = -1.0;
  for (int s : candidates) {
    double dmin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_targets; ++c) dmin = std::min(dmin, (target_position(positions, c) - grid.sensor(s)).norm());
    if (dmin > best_d) {
      best_d = dmin;
      best = s;
    }
  }
  return best;
}

RecoveryResult one_by_one_recovery(const MeasurementFrame& frame, const SensorGrid& grid, const MeasurementModel& mm,
                                   const PropagatedPrior& prior, const BoxConstraints& box,
                                   const ConsistencyConfig& cfg, const OptimizerOptions& opts) {
  const std::vector<int> boundary = boundary_sensors(grid);
  if (boundary.empty()) throw ConfigError("grid has no boundary sensors");

  SensorMask mask(static_cast<std::size_t>(grid.count()), 0);
  for (int s : boundary) mask[static_cast<std::size_t>(s)] = 1;
  std::vector<int> unused;
  for (int s = 0; s < grid.count(); ++s)
    if (!mask[static_cast<std::size_t>(s)]) unused.push_back(s);

  RecoveryResult out;
  const CombinedNll base(frame, grid, mm, prior);
  out.result = minimize(Objective::from(base.with_mask(mask)), prior.mean_x, box, opts);
  out.candidates_tried = 1;
  while (!unused.empty()) {
    const int s = maximin_sensor(unused, out.result.x_ml, grid);
    unused.erase(std::find(unused.begin(), unused.end(), s));
    mask[static_cast<std::size_t>(s)] = 1;
    out.result = minimize(Objective::from(base.with_mask(mask)), out.result.x_ml, box, opts);
    ++out.candidates_tried;
  }
  out.check = is_consistent(out.result.x_ml, frame, grid, mm, cfg);
  out.passed = out.check.consistent;
  return out;
}

Vec signal_excess(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                  const MeasurementModel& mm) {
  const int n_targets = static_cast<int>(positions.size() / 2);
  const Vec alpha = expected_signal(positions, grid, mm);
  Vec eps = Vec::Zero(n_targets);
  for (int c = 0; c < n_targets; ++c)
    for (int s = 0; s < grid.count(); ++s) {
      const double f = target_signal(target_position(positions, c), grid.sensor(s), mm);
      eps[c] += std::max(alpha[s] - frame[s], 0.0) - std::max((alpha[s] - frame[s]) - f, 0.0);
    }
  return eps;
}

Vec signal_deficit(const Vec& positions, const std::vector<int>& removed, const MeasurementFrame& frame,
                   const SensorGrid& grid, const MeasurementModel& mm) {
  const int n_targets = static_cast<int>(positions.size() / 2);
  Vec delta = Vec::Zero(grid.count());
  for (int s = 0; s < grid.count(); ++s) {
    double alpha = 0.0;
    for (int c = 0; c < n_targets; ++c) {
      if (std::find(removed.begin(), removed.end(), c) != removed.end()) continue;
      alpha += target_signal(target_position(positions, c), grid.sensor(s), mm);
    }
    delta[s] = std::max(frame[s] - alpha, 0.0);
  }
  return delta;
}

std::vector<GridSquare> grid_squares(const SensorGrid& grid) {
  std::vector<GridSquare> out;
  for (int r = 0; r + 1 < grid.rows; ++r)
    for (int c = 0; c + 1 < grid.cols; ++c) {
      GridSquare sq;
      sq.index = static_cast<int>(out.size());
      sq.corners = {grid.index(r, c), grid.index(r, c + 1), grid.index(r + 1, c), grid.index(r + 1, c + 1)};
      sq.center = 0.25 * (grid.sensor(sq.corners[0]) + grid.sensor(sq.corners[1]) + grid.sensor(sq.corners[2]) +
                          grid.sensor(sq.corners[3]));
      out.push_back(sq);
    }
  return out;
}

std::vector<int> top_indices(const Vec& values, int count) {
  std::vector<int> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values[a] > values[b]; });
  idx.resize(static_cast<std::size_t>(std::clamp<Eigen::Index>(count, 0, values.size())));
  return idx;
}

std::vector<std::vector<int>> ordered_subsets(int n, int k, int cap) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n || cap <= 0) return out;
  std::vector<int> cur(static_cast<std::size_t>(k));
  std::iota(cur.begin(), cur.end(), 0);
  for (;;) {
    out.push_back(cur);
    if (static_cast<int>(out.size()) >= cap) break;
    int i = k - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

RecoveryResult square_hopping_recovery(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                                       const MeasurementModel& mm, const PropagatedPrior& prior,
                                       const BoxConstraints& box, const ConsistencyConfig& cfg,
                                       const OptimizerOptions& opts) {
  const CombinedNll nll(frame, grid, mm, prior);
  RecoveryResult best;
  best.result.x_ml = positions;
  best.result.nll_value = nll.value(positions);
  best.result.converged = true;
  best.check = is_consistent(positions, frame, grid, mm, cfg);
  best.passed = best.check.consistent;
  if (best.passed) return best;

  const int n_targets = static_cast<int>(positions.size() / 2);
  const int n_bad = std::min(cfg.n_bad_tgt, n_targets);
  const std::vector<int> bad = top_indices(signal_excess(positions, frame, grid, mm), n_bad);
  const Vec deficit = signal_deficit(positions, bad, frame, grid, mm);

  const std::vector<GridSquare> squares = grid_squares(grid);
  Vec square_deficit(static_cast<Eigen::Index>(squares.size()));
  for (const auto& sq : squares) {
    double sum = 0.0;
    for (int s : sq.corners) sum += deficit[s];
    square_deficit[sq.index] = sum;
  }
  const std::vector<int> ranked = top_indices(square_deficit, std::min<int>(cfg.n_bad_sq, static_cast<int>(squares.size())));
  const auto subsets = ordered_subsets(static_cast<int>(ranked.size()), n_bad, cfg.max_subsets);

  const Objective obj = Objective::from(nll);
  for (const auto& subset : subsets) {
    Vec start = positions;
    for (int i = 0; i < n_bad; ++i) {
      const auto& sq = squares[static_cast<std::size_t>(ranked[static_cast<std::size_t>(subset[static_cast<std::size_t>(i)])])];
      start.segment<2>(2 * bad[static_cast<std::size_t>(i)]) = sq.center;
    }
    OptimizeResult r = minimize(obj, start, box, opts);
    ++best.candidates_tried;
    const ConsistencyCheck chk = is_consistent(r.x_ml, frame, grid, mm, cfg);
    if (chk.consistent) {
      best.result = std::move(r);
      best.check = chk;
      best.passed = true;
      return best;
    }
    if (r.nll_value < best.result.nll_value) {
      best.result = std::move(r);
      best.check = chk;
    }
  }
  return best;
}

}  // namespace tt
