#pragma once

#include <functional>

#include "ttfilter/model.hpp"
#include "ttfilter/nll.hpp"

namespace tt::testing {

inline Mat random_spd(int n, Rng& rng, double ridge = 0.5) {
  const Mat a = Mat::NullaryExpr(n, n, [&] { return std::normal_distribution<double>(0.0, 1.0)(rng); });
  return a * a.transpose() / n + ridge * Mat::Identity(n, n);
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline Vec uniform_positions(int targets, Rng& rng, double lo, double hi) {
  Vec x(2 * targets);
  for (int i = 0; i < x.size(); ++i) x[i] = uniform(rng, lo, hi);
  return x;
}

inline Vec central_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline Mat central_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x, double h) {
  Mat j(x.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    j.col(i) = (g(xp) - g(xm)) / (2.0 * h);
  }
  return j;
}

inline double relative_error(const Mat& approx, const Mat& exact) {
  return (approx - exact).norm() / std::max(exact.norm(), 1e-300);
}

/// Random belief over C targets with an SPD covariance.
inline GaussianBelief random_belief(int targets, Rng& rng) {
  GaussianBelief b;
  b.mean.resize(4 * targets);
  b.mean << uniform_positions(targets, rng, 5.0, 35.0), Vec::NullaryExpr(2 * targets, [&] { return uniform(rng, -0.5, 0.5); });
  b.cov = random_spd(4 * targets, rng, 0.2);
  return b;
}

/// Noisy frame for stacked positions.
inline MeasurementFrame noisy_frame(const Vec& positions, const SensorGrid& grid, const MeasurementModel& mm,
                                    Rng& rng) {
  Vec frame = expected_signal(positions, grid, mm);
  for (int s = 0; s < frame.size(); ++s)
    frame[s] += std::sqrt(mm.variance(s)) * std::normal_distribution<double>(0.0, 1.0)(rng);
  return frame;
}

}  // namespace tt::testing
