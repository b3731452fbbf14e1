#include "ttfilter/quadrature.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ttfilter/model.hpp"

namespace tt {

double generalized_laguerre(int n, double a, double z) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + a - z;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + a - z) * cur - (k + a) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

RadialRule radial_rule(int d) {
  if (d < 2 || d % 2 != 0) throw ConfigError("radial rule needs an even dimension >= 2, got " + std::to_string(d));
  constexpr int n = 2;
  const double a = d / 2.0 - 1.0;
  RadialRule rule;
  rule.dimension = d;
  rule.z_minus = (a + 2.0) - std::sqrt(a + 2.0);
  rule.z_plus = (a + 2.0) + std::sqrt(a + 2.0);
  auto weight = [&](double z) {
    const double l = generalized_laguerre(n + 1, a, z);
    return std::tgamma(n + a + 1.0) * z / (std::tgamma(n + 1.0) * (n + 1.0) * (n + 1.0) * l * l);
  };
  rule.w_minus = weight(rule.z_minus);
  rule.w_plus = weight(rule.z_plus);
  return rule;
}

double simplex_offset(int d) { return (-1.0 + std::sqrt(d + 1.0)) / d; }

DirectionSet simplex_directions(int d) {
  if (d < 2) throw ConfigError("direction set needs dimension >= 2");
  DirectionSet set;
  set.directions.resize(d, d * (d + 1));
  const Vec q = Vec::Constant(d, simplex_offset(d));
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      Vec v = Vec::Zero(d);
      v[i] = 1.0;
      v[j] = -1.0;
      set.directions.col(k++) = v.normalized();
    }
  for (int j = 0; j < d; ++j) {
    Vec v = q;
    v[j] += 1.0;
    set.directions.col(k++) = v.normalized();
    set.directions.col(k++) = -v.normalized();
  }
  set.area_weight = std::pow(2.0 * M_PI, d / 2.0) / (std::tgamma(d / 2.0) * d * (d + 1.0));
  return set;
}

SigmaPointSet generate_sigma_points(const Vec& mean, const Mat& hessian, const RadialRule& rule,
                                    const DirectionSet& dirs) {
  const Eigen::Index d = mean.size();
  if (hessian.rows() != d || hessian.cols() != d || dirs.dimension() != d)
    throw std::invalid_argument("sigma point dimensions do not match");
  Eigen::LLT<Mat> llt(hessian);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all())
    throw NumericalError("Hessian is not positive definite; repair it before building sigma points");

  const Mat offsets = llt.matrixU().solve(dirs.directions);  // L^-T theta
  const int j = dirs.count();
  SigmaPointSet set;
  set.points.resize(d, 2 * j);
  set.radial_weight.resize(2 * j);
  const double r_minus = std::sqrt(2.0 * rule.z_minus);
  const double r_plus = std::sqrt(2.0 * rule.z_plus);
  for (int k = 0; k < j; ++k) {
    set.points.col(k) = mean + r_minus * offsets.col(k);
    set.points.col(j + k) = mean + r_plus * offsets.col(k);
    set.radial_weight[k] = rule.w_minus * std::exp(rule.z_minus);
    set.radial_weight[j + k] = rule.w_plus * std::exp(rule.z_plus);
  }
  return set;
}

void assign_weights(SigmaPointSet& set, const std::function<double(const Vec&)>& nll) {
  const int n = set.size();
  set.nll.resize(n);
  for (int k = 0; k < n; ++k) {
    set.nll[k] = nll(set.points.col(k));
    if (std::isnan(set.nll[k])) throw NumericalError("objective is NaN at a sigma point");
  }
  const double offset = set.nll.minCoeff();
  if (!std::isfinite(offset)) throw NumericalError("objective is not finite at any sigma point");
  set.weights.resize(n);
  for (int k = 0; k < n; ++k) set.weights[k] = set.radial_weight[k] * std::exp(-(set.nll[k] - offset));
  const double total = set.weights.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("sigma point weights underflowed (max NLL " + std::to_string(set.nll.maxCoeff()) + ")");
  set.normalizer = 1.0 / total;
  set.weights *= set.normalizer;
}

SigmaPointSet build_sigma_points(const Vec& mean, const Mat& hessian, const RadialRule& rule,
                                 const DirectionSet& dirs, const std::function<double(const Vec&)>& nll) {
  SigmaPointSet set = generate_sigma_points(mean, hessian, rule, dirs);
  assign_weights(set, nll);
  return set;
}

Vec2 polar_transform(const Vec2& x, const Vec2& sensor) {
  const Vec2 d = x - sensor;
  const double u = std::max(d.norm(), kMinRange);
  return {u, u * std::atan2(d.y(), d.x())};
}

Vec2 inverse_polar(const Vec2& uv, const Vec2& sensor) {
  if (uv[0] == 0.0) return sensor;
  const double angle = uv[1] / uv[0];
  return {uv[0] * std::cos(angle) + sensor.x(), uv[0] * std::sin(angle) + sensor.y()};
}

Mat2 polar_jacobian(const Vec2& offset) {
  const double r = std::max(offset.norm(), kMinRange);
  const double x = offset.x(), y = offset.y();
  const double theta = std::atan2(y, x);
  Mat2 j;
  j << x, y, x * theta - y, y * theta + x;
  return j / r;
}

Mat2 polar_covariance(const Vec2& offset, const Mat2& sigma_xx) {
  const Mat2 j = polar_jacobian(offset);
  const Mat2 s = j * sigma_xx * j.inverse();
  return 0.5 * (s + s.transpose());
}

bool polar_sigma_adjust(SigmaPointSet& set, const Vec& mean, int target, const Vec2& sensor, const Mat2& sigma_xx,
                        const RadialRule& rule, const DirectionSet& dirs) {
  const Vec2 offset = target_position(mean, target) - sensor;
  const Vec2 m_u = polar_transform(target_position(mean, target), sensor);
  const Mat2 sigma_uu = polar_covariance(offset, sigma_xx);
  Eigen::LLT<Mat2> llt(sigma_uu);
  if (llt.info() != Eigen::Success || !(llt.matrixLLT().diagonal().array() > 0.0).all()) return false;
  const Mat2 root = llt.matrixL();

  const int j = dirs.count();
  const double r_minus = std::sqrt(2.0 * rule.z_minus);
  const double r_plus = std::sqrt(2.0 * rule.z_plus);
  for (int k = 0; k < j; ++k) {
    const Vec2 theta = dirs.directions.col(k).segment<2>(2 * target);
    set.points.col(k).segment<2>(2 * target) = inverse_polar(m_u + r_minus * root * theta, sensor);
    set.points.col(j + k).segment<2>(2 * target) = inverse_polar(m_u + r_plus * root * theta, sensor);
  }
  return true;
}

}  // namespace tt
