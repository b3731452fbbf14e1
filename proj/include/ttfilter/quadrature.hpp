#pragma once

#include <functional>

#include "ttfilter/types.hpp"

namespace tt {

/// Two-point generalized Gauss-Laguerre rule for the weight s^(d/2-1) e^-s.
struct RadialRule {
  int dimension = 0;
  double z_minus = 0.0;
  double z_plus = 0.0;
  double w_minus = 0.0;
  double w_plus = 0.0;
};

RadialRule radial_rule(int d);

/// Generalized Laguerre polynomial L_n^(a)(z) by the three-term recurrence.
double generalized_laguerre(int n, double a, double z);

/// Unit-normalized root system of the d-dimensional zero-sum lattice:
/// d(d+1) directions stored as columns.
struct DirectionSet {
  Mat directions;
  double area_weight = 0.0;

  int dimension() const { return static_cast<int>(directions.rows()); }
  int count() const { return static_cast<int>(directions.cols()); }
};

DirectionSet simplex_directions(int d);

/// Scalar coefficient of the offset vector q = coeff * (1, ..., 1).
double simplex_offset(int d);

/// 2J integration points. Columns 0..J-1 use the inner radial node,
/// J..2J-1 the outer one, both over the same direction order.
struct SigmaPointSet {
  Mat points;         // d x 2J
  Vec radial_weight;  // w e^z for each point
  Vec nll;            // objective at each point
  Vec weights;        // normalized, sum to 1
  double normalizer = 0.0;  // C' relative to the min-NLL offset

  int size() const { return static_cast<int>(points.cols()); }
};

/// Points m + sqrt(2 z) L^-T theta with H = L L^T. Weights are left empty.
/// Throws NumericalError if H is not positive definite.
SigmaPointSet generate_sigma_points(const Vec& mean, const Mat& hessian, const RadialRule& rule,
                                    const DirectionSet& dirs);

/// Evaluate the objective at every point and fill in normalized weights
/// w e^z exp(-N(x_k)).
void assign_weights(SigmaPointSet& set, const std::function<double(const Vec&)>& nll);

SigmaPointSet build_sigma_points(const Vec& mean, const Mat& hessian, const RadialRule& rule,
                                 const DirectionSet& dirs, const std::function<double(const Vec&)>& nll);

/// (u, v) = (|x - s|, |x - s| * atan2(dy, dx)); the range is clamped away from zero.
Vec2 polar_transform(const Vec2& x, const Vec2& sensor);
Vec2 inverse_polar(const Vec2& uv, const Vec2& sensor);
/// d(u, v)/d(x, y) at offset (dx, dy) from the sensor.
Mat2 polar_jacobian(const Vec2& offset);

/// Regenerate the coordinates of target c in every point from a Gaussian in
/// polar coordinates about `sensor`, with covariance derived from the 2x2
/// Cartesian block `sigma_xx`. Returns false (points untouched) when the
/// transformed covariance is not positive definite. Weights must be
/// (re)assigned afterwards.
bool polar_sigma_adjust(SigmaPointSet& set, const Vec& mean, int target, const Vec2& sensor, const Mat2& sigma_xx,
                        const RadialRule& rule, const DirectionSet& dirs);

/// Covariance in polar-arc coordinates: J * sigma * J^-1, symmetrized.
Mat2 polar_covariance(const Vec2& offset, const Mat2& sigma_xx);

}  // namespace tt
