#pragma once

#include <cstdint>
#include <vector>

#include "ttfilter/rng.hpp"
#include "ttfilter/types.hpp"

namespace tt {

/// Rectangular sensor array, row-major, anchored at the origin.
struct SensorGrid {
  int rows = 0;
  int cols = 0;
  double spacing = 0.0;
  std::vector<Vec2> positions;

  int count() const { return static_cast<int>(positions.size()); }
  const Vec2& sensor(int s) const { return positions[static_cast<std::size_t>(s)]; }
  int index(int row, int col) const { return row * cols + col; }
  Vec2 extent_min() const { return Vec2::Zero(); }
  Vec2 extent_max() const { return {(cols - 1) * spacing, (rows - 1) * spacing}; }
  /// Index of the sensor nearest to p (lowest index on ties).
  int nearest_sensor(const Vec2& p) const;
};

SensorGrid build_grid(int rows, int cols, double spacing);

/// Per-target constant-velocity model; state order (x, y, vx, vy).
struct MotionModel {
  Mat4 transition = Mat4::Identity();
  Mat4 noise_cov = Mat4::Zero();
  double gamma = 0.0;

  /// Constant-velocity transition with V = gamma * [1/3 I, 1/2 I; 1/2 I, I].
  static MotionModel constant_velocity(double gamma);
};

Mat4 constant_velocity_transition();

/// Received amplitude model A / (r^p + d0) summed over targets.
struct MeasurementModel {
  double amplitude = 10.0;
  double d0 = 0.1;
  double exponent = 1.0;
  /// Either one shared variance or one entry per sensor.
  Vec sigma_s2 = Vec::Constant(1, 0.01);

  double variance(int s) const { return sigma_s2.size() == 1 ? sigma_s2[0] : sigma_s2[s]; }
  /// Noise-free simulation is the only caller that passes allow_zero_variance.
  void validate(int sensor_count, bool allow_zero_variance = false) const;
};

/// Below this range the target-sensor distance is clamped.
inline constexpr double kMinRange = 1e-6;

/// Column c holds target c as (x, y, vx, vy).
struct TargetState {
  Eigen::Matrix<double, 4, Eigen::Dynamic> targets;

  int count() const { return static_cast<int>(targets.cols()); }
  /// Stacked (x1, y1, x2, y2, ...).
  Vec positions() const;
  /// Stacked (vx1, vy1, vx2, vy2, ...).
  Vec velocities() const;
  /// Inverse of (positions; velocities) stacking.
  static TargetState from_stacked(const Vec& pos, const Vec& vel);
};

using MeasurementFrame = Vec;

struct Trajectory {
  TargetState initial;
  std::vector<TargetState> states;
  std::vector<MeasurementFrame> frames;

  int steps() const { return static_cast<int>(states.size()); }
};

struct Scenario {
  SensorGrid grid = build_grid(5, 5, 10.0);
  MotionModel motion = MotionModel::constant_velocity(0.05);
  MeasurementModel measurement;
  TargetState initial;
  /// Regenerate trajectories until every target stays inside the grid extent.
  bool require_inside = true;
  std::int64_t max_attempts = 5'000'000;

  int target_count() const { return initial.count(); }
  static Scenario standard();
};

/// Four targets starting at the reference benchmark states.
TargetState standard_initial_state();

/// Expected amplitude at every sensor for stacked target positions.
Vec expected_signal(const Vec& positions, const SensorGrid& grid, const MeasurementModel& mm);

/// Amplitude contribution f_{s,c} of one target at one sensor.
double target_signal(const Vec2& target, const Vec2& sensor, const MeasurementModel& mm);

TargetState propagate_truth(const TargetState& state, const MotionModel& mm, Rng& rng);

Trajectory simulate(const Scenario& scenario, int steps, std::uint64_t seed);

}  // namespace tt
