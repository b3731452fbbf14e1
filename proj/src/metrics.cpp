#include "ttfilter/metrics.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace tt {

std::vector<int> hungarian(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("hungarian: cost matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

OmatResult omat(const Vec& estimates, const Vec& truths) {
  if (estimates.size() != truths.size() || estimates.size() % 2 != 0)
    throw std::invalid_argument("omat: estimate and truth sets must have equal cardinality");
  const int n = static_cast<int>(estimates.size() / 2);
  OmatResult out;
  if (n == 0) return out;
  Mat cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = (target_position(estimates, i) - target_position(truths, j)).norm();
  out.assignment = hungarian(cost);
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += cost(i, out.assignment[static_cast<std::size_t>(i)]);
  out.value = total / n;
  return out;
}

double effective_sample_size(const Vec& weights) { return 1.0 / weights.squaredNorm(); }

std::vector<int> systematic_resample(const Vec& weights, Rng& rng) {
  const int n = static_cast<int>(weights.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double offset = unit(rng);
  std::vector<int> idx(static_cast<std::size_t>(n));
  double cumulative = weights[0];
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const double target = (i + offset) / n;
    while (target > cumulative && j < n - 1) cumulative += weights[++j];
    idx[static_cast<std::size_t>(i)] = j;
  }
  return idx;
}

TrackRecord bpf_track(const Trajectory& trajectory, const Scenario& scenario, const BpfConfig& cfg,
                      const FilterNoiseModel& noise, const GaussianBelief& initial, std::uint64_t seed,
                      int* weight_collapses) {
  using Clock = std::chrono::steady_clock;
  if (cfg.particles < 1) throw ConfigError("particle count must be at least 1");
  const int n_targets = scenario.target_count();
  const int n = 2 * n_targets;
  const int n_particles = cfg.particles;
  const SensorGrid& grid = scenario.grid;
  const MeasurementModel& mm = scenario.measurement;
  const int n_sensors = grid.count();

  Rng rng = make_stream(seed, 0, "bpf");
  std::normal_distribution<double> nd(0.0, 1.0);

  // Particle columns use the stacked (positions; velocities) layout.
  const Mat init_root = psd_sqrt(initial.cov);
  Mat particles(2 * n, n_particles);
  for (int k = 0; k < n_particles; ++k) {
    Vec z(2 * n);
    for (int i = 0; i < 2 * n; ++i) z[i] = nd(rng);
    particles.col(k) = initial.mean + init_root * z;
  }
  const Mat4 noise_root = psd_sqrt(noise.v_prime);
  const bool unit_exponent = mm.exponent == 1.0;

  Vec log_w(n_particles);
  Vec weights = Vec::Constant(n_particles, 1.0 / n_particles);
  int collapses = 0;

  TrackRecord rec;
  rec.variant = "bpf";
  for (int t = 0; t < trajectory.steps(); ++t) {
    const auto t0 = Clock::now();
    const MeasurementFrame& frame = trajectory.frames[static_cast<std::size_t>(t)];

    for (int k = 0; k < n_particles; ++k) {
      auto col = particles.col(k);
      for (int c = 0; c < n_targets; ++c) {
        const Vec4 z(nd(rng), nd(rng), nd(rng), nd(rng));
        const Vec4 w = noise_root * z;
        col[2 * c] += col[n + 2 * c] + w[0];
        col[2 * c + 1] += col[n + 2 * c + 1] + w[1];
        col[n + 2 * c] += w[2];
        col[n + 2 * c + 1] += w[3];
      }
      double nll = 0.0;
      for (int s = 0; s < n_sensors; ++s) {
        const Vec2& sp = grid.sensor(s);
        double alpha = 0.0;
        for (int c = 0; c < n_targets; ++c) {
          const double dx = col[2 * c] - sp.x(), dy = col[2 * c + 1] - sp.y();
          const double r = std::max(std::sqrt(dx * dx + dy * dy), kMinRange);
          alpha += mm.amplitude / ((unit_exponent ? r : std::pow(r, mm.exponent)) + mm.d0);
        }
        const double res = alpha - frame[s];
        nll += res * res / (2.0 * mm.variance(s));
      }
      log_w[k] = std::log(weights[k]) - nll;
    }

    const double max_log = log_w.maxCoeff();
    if (!std::isfinite(max_log)) {
      weights.setConstant(1.0 / n_particles);
      ++collapses;
    } else {
      weights = (log_w.array() - max_log).exp();
      const double total = weights.sum();
      if (!(total > 0.0) || !std::isfinite(total)) {
        weights.setConstant(1.0 / n_particles);
        ++collapses;
      } else {
        weights /= total;
      }
    }

    StepRecord sr;
    sr.t = t + 1;
    sr.truth = trajectory.states[static_cast<std::size_t>(t)].positions();
    const Vec mean = particles * weights;
    sr.estimate = mean.head(n);
    const Mat centered = particles.colwise() - mean;
    sr.cov = centered * weights.asDiagonal() * centered.transpose();

    if (effective_sample_size(weights) < cfg.ess_fraction * n_particles) {
      const std::vector<int> idx = systematic_resample(weights, rng);
      Mat resampled(2 * n, n_particles);
      for (int k = 0; k < n_particles; ++k) resampled.col(k) = particles.col(idx[static_cast<std::size_t>(k)]);
      particles.swap(resampled);
      weights.setConstant(1.0 / n_particles);
    }

    sr.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    sr.omat = omat(sr.estimate, sr.truth).value;
    rec.steps.push_back(std::move(sr));
  }
  if (weight_collapses) *weight_collapses = collapses;
  return rec;
}

}  // namespace tt
