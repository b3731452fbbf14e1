#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Invalid user-supplied configuration (dimensions, parameters, files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a valid result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric square root B with B * B^T = M for a symmetric PSD matrix.
/// Eigenvalues in [-tol * scale, 0) are clipped to zero; anything more
/// negative throws ConfigError.
Mat psd_sqrt(const Mat& m, double tol = 1e-10);

/// True when an LLT factorization of m succeeds with strictly positive pivots.
bool is_positive_definite(const Mat& m);

/// (m + m^T) / 2
inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// Position of target c within a stacked (x1, y1, x2, y2, ...) vector.
inline Vec2 target_position(const Vec& stacked, int c) {
  return stacked.segment<2>(2 * c);
}

}  // namespace tt
