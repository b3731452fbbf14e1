#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "support.hpp"
#include "ttfilter/model.hpp"

using namespace tt;
using namespace tt::testing;

TEST(Grid, StandardGridCoversFortyMeters) {
  const SensorGrid g = build_grid(5, 5, 10.0);
  EXPECT_EQ(g.count(), 25);
  EXPECT_EQ(g.extent_max(), Vec2(40.0, 40.0));
  EXPECT_EQ(g.sensor(0), Vec2(0.0, 0.0));
  EXPECT_EQ(g.sensor(24), Vec2(40.0, 40.0));
}

TEST(Grid, SmallestGridIsUnitSquare) {
  const SensorGrid g = build_grid(2, 2, 1.0);
  ASSERT_EQ(g.count(), 4);
  std::vector<Vec2> want = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  for (const auto& w : want)
    EXPECT_TRUE(std::any_of(g.positions.begin(), g.positions.end(), [&](const Vec2& p) { return p == w; }));
}

TEST(Grid, RectangularExtent) {
  const SensorGrid g = build_grid(3, 2, 10.0);
  ASSERT_EQ(g.count(), 6);
  EXPECT_EQ(g.extent_max(), Vec2(10.0, 20.0));
  // Hand-enumerated row-major coordinates.
  const std::vector<Vec2> want = {{0, 0}, {10, 0}, {0, 10}, {10, 10}, {0, 20}, {10, 20}};
  for (int s = 0; s < 6; ++s) EXPECT_EQ(g.sensor(s), want[static_cast<std::size_t>(s)]);
}

TEST(Grid, InvalidDimensionsThrow) {
  EXPECT_THROW(build_grid(1, 5, 10.0), ConfigError);
  EXPECT_THROW(build_grid(5, 0, 10.0), ConfigError);
  EXPECT_THROW(build_grid(5, 5, 0.0), ConfigError);
  EXPECT_THROW(build_grid(5, 5, -1.0), ConfigError);
}

TEST(Grid, NearestSensor) {
  const SensorGrid g = build_grid(5, 5, 10.0);
  EXPECT_EQ(g.nearest_sensor({21.0, 19.0}), g.index(2, 2));
  EXPECT_EQ(g.nearest_sensor({-3.0, 44.0}), g.index(4, 0));
}

TEST(Signal, TargetOnSensorGivesAOverD0) {
  const SensorGrid g = build_grid(5, 5, 10.0);
  const MeasurementModel mm;
  const Vec alpha = expected_signal(Vec2(10.0, 20.0), g, mm);
  // Range is clamped at kMinRange, so the peak sits just under A / d0.
  EXPECT_DOUBLE_EQ(alpha[g.index(2, 1)], mm.amplitude / (kMinRange + mm.d0));
  EXPECT_NEAR(alpha[g.index(2, 1)], mm.amplitude / mm.d0, 1e-3);
}

TEST(Signal, SingleTargetAtRange) {
  const SensorGrid g = build_grid(5, 5, 10.0);
  const MeasurementModel mm;
  const Vec alpha = expected_signal(Vec2(3.0, 4.0), g, mm);
  EXPECT_DOUBLE_EQ(alpha[0], mm.amplitude / (5.0 + mm.d0));
}

TEST(Signal, MatchesScalarLoop) {
  Rng rng(11);
  const SensorGrid g = build_grid(5, 5, 10.0);
  MeasurementModel mm;
  mm.exponent = 1.3;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = uniform_positions(4, rng, -5.0, 45.0);
    const Vec alpha = expected_signal(x, g, mm);
    for (int s = 0; s < g.count(); ++s) {
      double sum = 0.0;
      for (int c = 0; c < 4; ++c) {
        const double dx = x[2 * c] - g.sensor(s).x(), dy = x[2 * c + 1] - g.sensor(s).y();
        sum += mm.amplitude / (std::pow(std::hypot(dx, dy), mm.exponent) + mm.d0);
      }
      EXPECT_NEAR(alpha[s], sum, 1e-12 * sum);
    }
  }
}

TEST(Signal, PermutationInvariant) {
  Rng rng(12);
  const SensorGrid g = build_grid(5, 5, 10.0);
  const MeasurementModel mm;
  const Vec x = uniform_positions(4, rng, 0.0, 40.0);
  std::vector<int> perm = {2, 0, 3, 1};
  Vec y(8);
  for (int c = 0; c < 4; ++c) y.segment<2>(2 * c) = x.segment<2>(2 * perm[static_cast<std::size_t>(c)]);
  EXPECT_LT((expected_signal(x, g, mm) - expected_signal(y, g, mm)).norm(), 1e-12);
}

TEST(Signal, MonotoneInDistance) {
  const MeasurementModel mm;
  double prev = std::numeric_limits<double>::infinity();
  for (double r = 0.0; r < 50.0; r += 0.25) {
    const double f = target_signal(Vec2(r, 0.0), Vec2::Zero(), mm);
    EXPECT_LT(f, prev);
    prev = f;
  }
}

TEST(Measurement, ValidateRejectsBadValues) {
  MeasurementModel mm;
  EXPECT_NO_THROW(mm.validate(25));
  mm.sigma_s2 = Vec::Constant(3, 0.1);
  EXPECT_THROW(mm.validate(25), ConfigError);
  mm.sigma_s2 = Vec::Constant(25, 0.1);
  EXPECT_NO_THROW(mm.validate(25));
  mm.sigma_s2[3] = 0.0;
  EXPECT_THROW(mm.validate(25), ConfigError);
  EXPECT_NO_THROW(mm.validate(25, true));
  mm = MeasurementModel{};
  mm.d0 = 0.0;
  EXPECT_THROW(mm.validate(25), ConfigError);
}

TEST(Motion, DefaultNoiseMatchesConstantVelocityForm) {
  const MotionModel m = MotionModel::constant_velocity(0.05);
  Mat4 v;
  v << 1.0 / 3, 0, 0.5, 0, 0, 1.0 / 3, 0, 0.5, 0.5, 0, 1, 0, 0, 0.5, 0, 1;
  EXPECT_LT((m.noise_cov - 0.05 * v).norm(), 1e-15);
  Mat4 f = Mat4::Identity();
  f(0, 2) = f(1, 3) = 1.0;
  EXPECT_EQ(m.transition, f);
}

TEST(Motion, ZeroNoiseIsDeadReckoning) {
  const MotionModel m = MotionModel::constant_velocity(0.0);
  TargetState s = standard_initial_state();
  Rng rng(1);
  const TargetState one = propagate_truth(s, m, rng);
  for (int c = 0; c < s.count(); ++c) {
    EXPECT_EQ(one.targets.col(c).head<2>(), Vec2(s.targets.col(c).head<2>() + s.targets.col(c).tail<2>()));
    EXPECT_EQ(one.targets.col(c).tail<2>(), Vec2(s.targets.col(c).tail<2>()));
  }
  const TargetState two = propagate_truth(one, m, rng);
  const Mat4 f2 = m.transition * m.transition;
  for (int c = 0; c < s.count(); ++c)
    EXPECT_LT((two.targets.col(c) - f2 * s.targets.col(c)).norm(), 1e-12);
}

TEST(Motion, EmpiricalNoiseCovarianceMatches) {
  const MotionModel m = MotionModel::constant_velocity(0.05);
  TargetState s;
  s.targets = Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, 1);
  Rng rng(5);
  const int n = 100000;
  Mat4 acc = Mat4::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec4 w = propagate_truth(s, m, rng).targets.col(0);
    acc += w * w.transpose();
  }
  acc /= n;
  EXPECT_LT((acc - m.noise_cov).norm() / m.noise_cov.norm(), 0.05);
}

TEST(Motion, IndefiniteNoiseRejected) {
  MotionModel m = MotionModel::constant_velocity(0.05);
  m.noise_cov(0, 0) = -1.0;
  TargetState s = standard_initial_state();
  Rng rng(1);
  EXPECT_THROW(propagate_truth(s, m, rng), ConfigError);
}

TEST(Simulate, NoiseFreeFramesEqualExpectedSignal) {
  Scenario sc = Scenario::standard();
  sc.measurement.sigma_s2 = Vec::Constant(1, 0.0);
  const Trajectory tr = simulate(sc, 10, 3);
  ASSERT_EQ(tr.steps(), 10);
  for (int t = 0; t < tr.steps(); ++t)
    EXPECT_EQ(tr.frames[static_cast<std::size_t>(t)],
              expected_signal(tr.states[static_cast<std::size_t>(t)].positions(), sc.grid, sc.measurement));
}

TEST(Simulate, SameSeedSameTrajectory) {
  const Scenario sc = Scenario::standard();
  const Trajectory a = simulate(sc, 40, 99);
  const Trajectory b = simulate(sc, 40, 99);
  const Trajectory c = simulate(sc, 40, 100);
  bool differs = false;
  for (int t = 0; t < 40; ++t) {
    const auto k = static_cast<std::size_t>(t);
    EXPECT_EQ(a.states[k].targets, b.states[k].targets);
    EXPECT_EQ(a.frames[k], b.frames[k]);
    differs = differs || a.frames[k] != c.frames[k];
  }
  EXPECT_TRUE(differs);
}

TEST(Simulate, TargetsStayInsideGrid) {
  const Scenario sc = Scenario::standard();
  const Trajectory tr = simulate(sc, 40, 4);
  for (const auto& s : tr.states)
    for (int c = 0; c < s.count(); ++c) {
      EXPECT_GE(s.targets.col(c).head<2>().minCoeff(), 0.0);
      EXPECT_LE(s.targets.col(c).head<2>().maxCoeff(), 40.0);
    }
}

TEST(Simulate, MeasurementNoiseVariance) {
  Scenario sc = Scenario::standard();
  sc.measurement.sigma_s2 = Vec::Constant(1, 0.1);
  sc.motion = MotionModel::constant_velocity(0.0);
  sc.initial.targets.bottomRows(2).setZero();  // parked targets never leave the grid
  const Trajectory tr = simulate(sc, 4000, 8);  // 4000 x 25 = 1e5 residuals
  double sum = 0.0, sq = 0.0;
  long n = 0;
  for (int t = 0; t < tr.steps(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    const Vec r = tr.frames[k] - expected_signal(tr.states[k].positions(), sc.grid, sc.measurement);
    sum += r.sum();
    sq += r.squaredNorm();
    n += r.size();
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(var, 0.1, 0.005);
}

TEST(Simulate, ExhaustedAttemptsIsConfigError) {
  Scenario sc = Scenario::standard();
  sc.motion = MotionModel::constant_velocity(50.0);
  sc.max_attempts = 20;
  EXPECT_THROW(simulate(sc, 40, 1), ConfigError);
}
