#include "ttfilter/model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tt {

Mat psd_sqrt(const Mat& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
  if (es.info() != Eigen::Success) throw NumericalError("psd_sqrt: eigendecomposition failed");
  Vec lambda = es.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < -tol * scale) {
      throw ConfigError("matrix is not positive semidefinite (eigenvalue " + std::to_string(lambda[i]) + ")");
    }
    lambda[i] = std::sqrt(std::max(lambda[i], 0.0));
  }
  return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

bool is_positive_definite(const Mat& m) {
  if (m.size() == 0) return true;
  if (!m.allFinite()) return false;
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixLLT().diagonal().array() > 0.0).all();
}

int SensorGrid::nearest_sensor(const Vec2& p) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int s = 0; s < count(); ++s) {
    const double d = (sensor(s) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  return best;
}

SensorGrid build_grid(int rows, int cols, double spacing) {
  if (rows < 2 || cols < 2) throw ConfigError("sensor grid needs at least 2 rows and 2 columns");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("sensor spacing must be positive");
  SensorGrid g;
  g.rows = rows;
  g.cols = cols;
  g.spacing = spacing;
  g.positions.reserve(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) g.positions.emplace_back(c * spacing, r * spacing);
  return g;
}

Mat4 constant_velocity_transition() {
  Mat4 f = Mat4::Identity();
  f(0, 2) = 1.0;
  f(1, 3) = 1.0;
  return f;
}

MotionModel MotionModel::constant_velocity(double gamma) {
  if (!(gamma >= 0.0)) throw ConfigError("process noise multiplier must be nonnegative");
  MotionModel m;
  m.transition = constant_velocity_transition();
  Mat4 v;
  v << 1.0 / 3.0, 0.0, 0.5, 0.0,
       0.0, 1.0 / 3.0, 0.0, 0.5,
       0.5, 0.0, 1.0, 0.0,
       0.0, 0.5, 0.0, 1.0;
  m.noise_cov = gamma * v;
  m.gamma = gamma;
  return m;
}

void MeasurementModel::validate(int sensor_count, bool allow_zero_variance) const {
  if (!(amplitude > 0.0)) throw ConfigError("amplitude A must be positive");
  if (!(d0 > 0.0)) throw ConfigError("offset d0 must be positive");
  if (!(exponent > 0.0)) throw ConfigError("exponent p must be positive");
  if (sigma_s2.size() != 1 && sigma_s2.size() != sensor_count)
    throw ConfigError("sigma_s2 must be a scalar or have one entry per sensor");
  if (allow_zero_variance ? !(sigma_s2.array() >= 0.0).all() : !(sigma_s2.array() > 0.0).all())
    throw ConfigError("sigma_s2 must be positive");
}

Vec TargetState::positions() const {
  Vec out(2 * count());
  for (int c = 0; c < count(); ++c) out.segment<2>(2 * c) = targets.col(c).head<2>();
  return out;
}

Vec TargetState::velocities() const {
  Vec out(2 * count());
  for (int c = 0; c < count(); ++c) out.segment<2>(2 * c) = targets.col(c).tail<2>();
  return out;
}

TargetState TargetState::from_stacked(const Vec& pos, const Vec& vel) {
  TargetState s;
  const Eigen::Index n = pos.size() / 2;
  s.targets.resize(4, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    s.targets.col(c).head<2>() = pos.segment<2>(2 * c);
    s.targets.col(c).tail<2>() = vel.segment<2>(2 * c);
  }
  return s;
}

TargetState standard_initial_state() {
  TargetState s;
  s.targets.resize(4, 4);
  s.targets.col(0) << 12.0, 6.0, 0.001, 0.001;
  s.targets.col(1) << 32.0, 32.0, -0.001, -0.005;
  s.targets.col(2) << 20.0, 13.0, -0.1, 0.01;
  s.targets.col(3) << 15.0, 35.0, 0.002, 0.002;
  return s;
}

Scenario Scenario::standard() {
  Scenario sc;
  sc.initial = standard_initial_state();
  return sc;
}

double target_signal(const Vec2& target, const Vec2& sensor, const MeasurementModel& mm) {
  const double r = std::max((target - sensor).norm(), kMinRange);
  return mm.amplitude / (std::pow(r, mm.exponent) + mm.d0);
}

Vec expected_signal(const Vec& positions, const SensorGrid& grid, const MeasurementModel& mm) {
  const int n_targets = static_cast<int>(positions.size() / 2);
  Vec alpha = Vec::Zero(grid.count());
  for (int s = 0; s < grid.count(); ++s) {
    double sum = 0.0;
    for (int c = 0; c < n_targets; ++c) sum += target_signal(target_position(positions, c), grid.sensor(s), mm);
    alpha[s] = sum;
  }
  return alpha;
}

namespace {

TargetState propagate_with_sqrt(const TargetState& state, const Mat4& transition, const Mat4& noise_sqrt,
                                Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  TargetState next;
  next.targets.resize(4, state.count());
  for (int c = 0; c < state.count(); ++c) {
    Vec4 z(nd(rng), nd(rng), nd(rng), nd(rng));
    next.targets.col(c) = transition * state.targets.col(c) + noise_sqrt * z;
  }
  return next;
}

bool inside(const TargetState& s, const SensorGrid& grid) {
  const Vec2 lo = grid.extent_min();
  const Vec2 hi = grid.extent_max();
  for (int c = 0; c < s.count(); ++c) {
    const double x = s.targets(0, c), y = s.targets(1, c);
    if (x < lo.x() || x > hi.x() || y < lo.y() || y > hi.y()) return false;
  }
  return true;
}

}  // namespace

TargetState propagate_truth(const TargetState& state, const MotionModel& mm, Rng& rng) {
  const Mat4 root = psd_sqrt(mm.noise_cov);
  return propagate_with_sqrt(state, mm.transition, root, rng);
}

Trajectory simulate(const Scenario& scenario, int steps, std::uint64_t seed) {
  if (steps < 1) throw ConfigError("trajectory needs at least one step");
  if (scenario.target_count() < 1) throw ConfigError("scenario has no targets");
  scenario.measurement.validate(scenario.grid.count(), true);
  if (!scenario.initial.targets.allFinite()) throw ConfigError("initial target states must be finite");

  const Mat4 root = psd_sqrt(scenario.motion.noise_cov);
  Rng truth_rng = make_stream(seed, 0, "truth");
  Rng meas_rng = make_stream(seed, 0, "measurement");

  Trajectory traj;
  traj.initial = scenario.initial;
  traj.states.reserve(static_cast<std::size_t>(steps));

  std::int64_t attempts = 0;
  for (;;) {
    ++attempts;
    traj.states.clear();
    TargetState cur = scenario.initial;
    bool ok = true;
    for (int t = 0; t < steps; ++t) {
      cur = propagate_with_sqrt(cur, scenario.motion.transition, root, truth_rng);
      if (scenario.require_inside && !inside(cur, scenario.grid)) {
        ok = false;
        break;
      }
      traj.states.push_back(cur);
    }
    if (ok) break;
    if (attempts >= scenario.max_attempts)
      throw ConfigError("no trajectory stayed inside the sensor grid after " + std::to_string(attempts) +
                        " attempts");
  }

  std::normal_distribution<double> nd(0.0, 1.0);
  const int n_sensors = scenario.grid.count();
  traj.frames.reserve(static_cast<std::size_t>(steps));
  for (const auto& st : traj.states) {
    Vec a = expected_signal(st.positions(), scenario.grid, scenario.measurement);
    for (int s = 0; s < n_sensors; ++s) a[s] += std::sqrt(scenario.measurement.variance(s)) * nd(meas_rng);
    traj.frames.push_back(std::move(a));
  }
  return traj;
}

}  // namespace tt
