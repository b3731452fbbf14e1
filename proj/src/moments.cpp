#include "ttfilter/moments.hpp"

#include <cmath>
#include <string>

namespace tt {

GaussianBelief PosteriorBelief::to_belief() const {
  GaussianBelief b;
  b.mean.resize(m_x.size() + m_v.size());
  b.mean << m_x, m_v;
  b.cov = cov;
  return b;
}

SpatialMoments spatial_moments(const SigmaPointSet& points) {
  SpatialMoments out;
  out.mean = points.points * points.weights;
  const Mat centered = points.points.colwise() - out.mean;
  out.cov = symmetrize(centered * points.weights.asDiagonal() * centered.transpose());
  return out;
}

VelocityMoments velocity_moments(const PropagatedPrior& prior, const Vec& m_x, const Mat& sigma_xx) {
  VelocityMoments out;
  out.gain = prior.cov_vx * prior.cov_xx_inv;
  out.offset = prior.mean_v - out.gain * prior.mean_x;
  out.m_v = out.offset + out.gain * m_x;
  out.sigma_vv_given_x = symmetrize(prior.cov_vv - out.gain * prior.cov_vx.transpose());
  out.sigma_vv = symmetrize(out.sigma_vv_given_x + out.gain * sigma_xx * out.gain.transpose());
  out.sigma_vx = out.gain * sigma_xx;
  return out;
}

PosteriorBelief assemble(const Vec& m_x, const Vec& m_v, const Mat& sigma_xx, const Mat& sigma_vv,
                         const Mat& sigma_vx) {
  const Eigen::Index n = m_x.size();
  if (m_v.size() != n || sigma_xx.rows() != n || sigma_xx.cols() != n || sigma_vv.rows() != n ||
      sigma_vv.cols() != n || sigma_vx.rows() != n || sigma_vx.cols() != n)
    throw std::invalid_argument("posterior block shapes are inconsistent");

  auto check_symmetric = [](const Mat& m, const char* name) {
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw NumericalError(std::string(name) + " block is not symmetric");
  };
  check_symmetric(sigma_xx, "spatial");
  check_symmetric(sigma_vv, "velocity");

  PosteriorBelief pb;
  pb.m_x = m_x;
  pb.m_v = m_v;
  pb.cov.resize(2 * n, 2 * n);
  pb.cov << sigma_xx, sigma_vx.transpose(), sigma_vx, sigma_vv;
  pb.cov = symmetrize(pb.cov);

  Eigen::SelfAdjointEigenSolver<Mat> es(pb.cov);
  if (es.info() != Eigen::Success) throw NumericalError("posterior eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < kCovarianceFloor) {
    const Vec clipped = es.eigenvalues().cwiseMax(kCovarianceFloor);
    pb.cov = symmetrize(es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose());
  }
  pb.sigma_xx = pb.cov.topLeftCorner(n, n);
  pb.sigma_vx = pb.cov.bottomLeftCorner(n, n);
  pb.sigma_vv = pb.cov.bottomRightCorner(n, n);
  return pb;
}

}  // namespace tt
