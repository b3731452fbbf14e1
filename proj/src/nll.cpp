#include "ttfilter/nll.hpp"

#include <cmath>
#include <string>

namespace tt {

namespace {

bool included(const SensorMask& mask, int s) { return mask.empty() || mask[static_cast<std::size_t>(s)] != 0; }

void check_sizes(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid) {
  if (positions.size() % 2 != 0 || positions.size() == 0)
    throw std::invalid_argument("positions must hold 2C entries");
  if (frame.size() != grid.count()) throw std::invalid_argument("frame length must equal the sensor count");
}

// Radial profile of one target-sensor term: value f(r) and the first and
// second derivatives with respect to r, at the clamped range.
struct Radial {
  double f, df, d2f, r;
};

Radial radial_terms(double dist, const MeasurementModel& mm) {
  const double r = std::max(dist, kMinRange);
  const double p = mm.exponent;
  const double rp = std::pow(r, p);
  const double den = rp + mm.d0;
  const double f = mm.amplitude / den;
  // d/dr A/(r^p + d0)
  const double df = -mm.amplitude * p * rp / r / (den * den);
  const double d2f = -mm.amplitude * p * (p - 1.0) * rp / (r * r) / (den * den) +
                     2.0 * mm.amplitude * p * p * rp * rp / (r * r) / (den * den * den);
  return {f, df, d2f, r};
}

}  // namespace

void GaussianBelief::validate() const {
  if (mean.size() % 4 != 0 || mean.size() == 0) throw NumericalError("belief mean must hold 4C entries");
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw NumericalError("belief covariance has the wrong shape");
  if (!mean.allFinite() || !cov.allFinite()) throw NumericalError("belief has non-finite entries");
  const double scale = std::max(cov.cwiseAbs().maxCoeff(), 1e-300);
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NumericalError("belief covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(cov, Eigen::EigenvaluesOnly);
  const double trace_scale = std::max(std::abs(cov.trace()), 1e-300);
  if (es.eigenvalues().minCoeff() < -1e-8 * trace_scale)
    throw NumericalError("belief covariance is not positive semidefinite");
}

FilterNoiseModel FilterNoiseModel::with_alpha(double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  FilterNoiseModel fm;
  fm.alpha = alpha;
  fm.v_prime << alpha, 0.0, 0.1, 0.0,
                0.0, alpha, 0.0, 0.1,
                0.1, 0.0, 0.03, 0.0,
                0.0, 0.1, 0.0, 0.03;
  return fm;
}

NllReport& NllReport::operator+=(const NllReport& other) {
  value += other.value;
  grad += other.grad;
  hess += other.hess;
  return *this;
}

Mat stacked_per_target(const Mat4& block, int targets) {
  const int n = 2 * targets;
  Mat out = Mat::Zero(2 * n, 2 * n);
  for (int c = 0; c < targets; ++c) {
    const int idx[4] = {2 * c, 2 * c + 1, n + 2 * c, n + 2 * c + 1};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out(idx[i], idx[j]) = block(i, j);
  }
  return out;
}

Mat stacked_transition(int targets) {
  const int n = 2 * targets;
  Mat f = Mat::Identity(2 * n, 2 * n);
  f.topRightCorner(n, n) = Mat::Identity(n, n);
  return f;
}

double measurement_nll_value(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                             const MeasurementModel& mm, const SensorMask& mask) {
  check_sizes(positions, frame, grid);
  const int n_targets = static_cast<int>(positions.size() / 2);
  double value = 0.0;
  for (int s = 0; s < grid.count(); ++s) {
    if (!included(mask, s)) continue;
    const double sig2 = mm.variance(s);
    if (std::isinf(sig2)) continue;
    double alpha = 0.0;
    for (int c = 0; c < n_targets; ++c) alpha += target_signal(target_position(positions, c), grid.sensor(s), mm);
    const double res = alpha - frame[s];
    value += res * res / (2.0 * sig2);
  }
  return value;
}

NllReport measurement_nll(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                          const MeasurementModel& mm, const SensorMask& mask) {
  check_sizes(positions, frame, grid);
  const int n_targets = static_cast<int>(positions.size() / 2);
  const int n = 2 * n_targets;

  NllReport rep;
  rep.grad = Vec::Zero(n);
  rep.hess = Mat::Zero(n, n);

  Vec jac_row(n);
  std::vector<Mat2> curv(static_cast<std::size_t>(n_targets));

  for (int s = 0; s < grid.count(); ++s) {
    if (!included(mask, s)) continue;
    const double sig2 = mm.variance(s);
    if (std::isinf(sig2)) continue;
    const double inv_var = 1.0 / sig2;
    double alpha = 0.0;
    for (int c = 0; c < n_targets; ++c) {
      const Vec2 rv = target_position(positions, c) - grid.sensor(s);
      const double dist = rv.norm();
      const Radial t = radial_terms(dist, mm);
      alpha += t.f;
      const Vec2 dir = dist > 0.0 ? Vec2(rv / dist) : Vec2::Zero();
      jac_row.segment<2>(2 * c) = t.df * dir;
      const Mat2 outer = dir * dir.transpose();
      curv[static_cast<std::size_t>(c)] = t.d2f * outer + (t.df / t.r) * (Mat2::Identity() - outer);
    }
    const double res = alpha - frame[s];
    rep.value += res * res * 0.5 * inv_var;
    rep.grad.noalias() += (res * inv_var) * jac_row;
    rep.hess.noalias() += inv_var * jac_row * jac_row.transpose();
    for (int c = 0; c < n_targets; ++c) rep.hess.block<2, 2>(2 * c, 2 * c) += (res * inv_var) * curv[static_cast<std::size_t>(c)];
  }
  rep.hess = symmetrize(rep.hess);
  return rep;
}

namespace {

PropagatedPrior split_prior(Vec mean, Mat cov) {
  const int n = static_cast<int>(mean.size() / 2);
  PropagatedPrior pp;
  pp.mean = std::move(mean);
  pp.cov = std::move(cov);

  Eigen::SelfAdjointEigenSolver<Mat> es(pp.cov, Eigen::EigenvaluesOnly);
  const double trace_scale = std::max(std::abs(pp.cov.trace()), 1e-300);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < -1e-8 * trace_scale)
    throw NumericalError("propagated covariance is not positive semidefinite");

  pp.mean_x = pp.mean.head(n);
  pp.mean_v = pp.mean.tail(n);
  pp.cov_xx = pp.cov.topLeftCorner(n, n);
  pp.cov_vx = pp.cov.bottomLeftCorner(n, n);
  pp.cov_vv = pp.cov.bottomRightCorner(n, n);

  Eigen::LLT<Mat> llt(pp.cov_xx);
  if (llt.info() != Eigen::Success) throw NumericalError("propagated spatial covariance is singular");
  pp.cov_xx_inv = symmetrize(llt.solve(Mat::Identity(n, n)));
  return pp;
}

}  // namespace

PropagatedPrior propagate_prior(const GaussianBelief& belief, const FilterNoiseModel& fm) {
  const int n_targets = belief.target_count();
  const Mat f = stacked_transition(n_targets);
  return split_prior(f * belief.mean,
                     symmetrize(f * belief.cov * f.transpose() + stacked_per_target(fm.v_prime, n_targets)));
}

PropagatedPrior prior_from_belief(const GaussianBelief& belief) { return split_prior(belief.mean, symmetrize(belief.cov)); }

double prior_nll_value(const Vec& positions, const PropagatedPrior& prior) {
  const Vec d = positions - prior.mean_x;
  return 0.5 * d.dot(prior.cov_xx_inv * d);
}

NllReport prior_nll(const Vec& positions, const PropagatedPrior& prior) {
  if (positions.size() != prior.mean_x.size()) throw std::invalid_argument("positions/prior size mismatch");
  const Vec d = positions - prior.mean_x;
  NllReport rep;
  rep.grad = prior.cov_xx_inv * d;
  rep.value = 0.5 * d.dot(rep.grad);
  rep.hess = prior.cov_xx_inv;
  return rep;
}

NllReport combined_nll(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                       const MeasurementModel& mm, const PropagatedPrior& prior) {
  NllReport rep = measurement_nll(positions, frame, grid, mm);
  rep += prior_nll(positions, prior);
  return rep;
}

double CombinedNll::value(const Vec& positions) const {
  double v = prior_nll_value(positions, *prior_);
  if (use_measurements_) v += measurement_nll_value(positions, *frame_, *grid_, *mm_, mask_);
  return v;
}

double CombinedNll::measurement_value(const Vec& positions) const {
  if (!use_measurements_) return 0.0;
  return measurement_nll_value(positions, *frame_, *grid_, *mm_, mask_);
}

NllReport CombinedNll::evaluate(const Vec& positions) const {
  NllReport rep = prior_nll(positions, *prior_);
  if (use_measurements_) rep += measurement_nll(positions, *frame_, *grid_, *mm_, mask_);
  return rep;
}

}  // namespace tt
