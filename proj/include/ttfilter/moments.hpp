#pragma once

#include "ttfilter/nll.hpp"
#include "ttfilter/quadrature.hpp"

namespace tt {

struct PosteriorBelief {
  Vec m_x;
  Vec m_v;
  Mat sigma_xx;
  Mat sigma_vv;
  Mat sigma_vx;
  Mat cov;  // [[xx, vx^T], [vx, vv]]

  GaussianBelief to_belief() const;
};

struct SpatialMoments {
  Vec mean;
  Mat cov;
};

SpatialMoments spatial_moments(const SigmaPointSet& points);

/// Velocity moments under the prior's conditional Gaussian v | x.
struct VelocityMoments {
  Vec m_v;
  Mat sigma_vv;
  Mat sigma_vx;
  Mat gain;            // Q = Sigma_vx^prop (Sigma_xx^prop)^-1
  Vec offset;          // q = m_v^prop - Q m_x^prop
  Mat sigma_vv_given_x;
};

VelocityMoments velocity_moments(const PropagatedPrior& prior, const Vec& m_x, const Mat& sigma_xx);

/// Eigenvalue floor applied to the assembled covariance.
inline constexpr double kCovarianceFloor = 1e-10;

PosteriorBelief assemble(const Vec& m_x, const Vec& m_v, const Mat& sigma_xx, const Mat& sigma_vv,
                         const Mat& sigma_vx);

}  // namespace tt
