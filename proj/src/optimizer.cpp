#include "ttfilter/optimizer.hpp"

#include <cmath>
#include <limits>

namespace tt {

BoxConstraints BoxConstraints::around_grid(const SensorGrid& grid, int targets, double margin) {
  BoxConstraints box;
  box.lower.resize(2 * targets);
  box.upper.resize(2 * targets);
  const Vec2 lo = grid.extent_min() - Vec2::Constant(margin);
  const Vec2 hi = grid.extent_max() + Vec2::Constant(margin);
  for (int c = 0; c < targets; ++c) {
    box.lower.segment<2>(2 * c) = lo;
    box.upper.segment<2>(2 * c) = hi;
  }
  return box;
}

Objective Objective::from(const CombinedNll& nll) {
  return {[nll](const Vec& x) { return nll.value(x); }, [nll](const Vec& x) { return nll.evaluate(x); }};
}

double projected_gradient_norm(const Vec& x, const Vec& grad, const BoxConstraints& box) {
  if (x.size() == 0) return 0.0;
  return (x - box.project(x - grad)).cwiseAbs().maxCoeff();
}

namespace {

std::vector<int> free_indices(const Vec& x, const Vec& g, const BoxConstraints& box) {
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const bool at_lower = x[i] <= box.lower[i] && g[i] > 0.0;
    const bool at_upper = x[i] >= box.upper[i] && g[i] < 0.0;
    if (!at_lower && !at_upper) idx.push_back(static_cast<int>(i));
  }
  return idx;
}

// Newton direction on the free variables with a Levenberg shift when the
// reduced Hessian is not positive definite. Returns the shifted model
// Hessian used through `model`.
Vec newton_direction(const Vec& g, const Mat& h, const std::vector<int>& free, Mat& model) {
  const auto nf = static_cast<Eigen::Index>(free.size());
  Mat hf(nf, nf);
  Vec gf(nf);
  for (Eigen::Index i = 0; i < nf; ++i) {
    gf[i] = g[free[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < nf; ++j) hf(i, j) = h(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
  }
  double lambda = 0.0;
  const double base = std::max(1e-6 * std::abs(hf.trace()) / static_cast<double>(std::max<Eigen::Index>(nf, 1)), 1e-12);
  Eigen::LLT<Mat> llt;
  for (int attempt = 0; attempt < 200; ++attempt) {
    Mat shifted = hf;
    shifted.diagonal().array() += lambda;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all()) break;
    lambda = lambda == 0.0 ? base : 2.0 * lambda;
  }
  const Vec pf = -llt.solve(gf);

  Vec p = Vec::Zero(g.size());
  model = h;
  for (Eigen::Index i = 0; i < nf; ++i) {
    p[free[static_cast<std::size_t>(i)]] = pf[i];
    model(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(i)]) += lambda;
  }
  if (!p.allFinite()) p.setZero();
  return p;
}

}  // namespace

OptimizeResult minimize(const Objective& objective, const Vec& x0, const BoxConstraints& box,
                        const OptimizerOptions& opts) {
  if (box.lower.size() != x0.size() || box.upper.size() != x0.size())
    throw std::invalid_argument("box dimension does not match the start point");
  if (!(box.lower.array() < box.upper.array()).all()) throw std::invalid_argument("box needs lower < upper");

  OptimizeResult res;
  Vec x = box.project(x0);
  NllReport rep = objective.evaluate(x);
  if (!std::isfinite(rep.value) || !rep.grad.allFinite()) throw NumericalError("objective is not finite at the start point");

  double radius = opts.initial_radius;
  for (;;) {
    res.projected_gradient_norm = projected_gradient_norm(x, rep.grad, box);
    if (res.projected_gradient_norm <= opts.gradient_tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opts.max_iterations) break;

    const std::vector<int> free = free_indices(x, rep.grad, box);
    Mat model;
    Vec p = newton_direction(rep.grad, rep.hess, free, model);

    bool accepted = false;
    Vec x_new;
    double step_radius = std::min(radius, p.norm());
    for (int attempt = 0; attempt < 40 && step_radius > 1e-14; ++attempt) {
      const Vec trial = box.project(x + p * (step_radius / std::max(p.norm(), 1e-300)));
      const Vec s = trial - x;
      if (s.squaredNorm() == 0.0) break;
      const double f_trial = objective.value(trial);
      const double predicted = -(rep.grad.dot(s) + 0.5 * s.dot(model * s));
      const double actual = rep.value - f_trial;
      if (std::isfinite(f_trial) && actual > 0.0 && (predicted <= 0.0 || actual >= 0.1 * predicted)) {
        accepted = true;
        x_new = trial;
        if (predicted > 0.0 && actual >= 0.75 * predicted && s.norm() >= 0.99 * radius)
          radius = std::min(2.0 * radius, opts.max_radius);
        break;
      }
      step_radius = 0.25 * s.norm();
      radius = std::max(step_radius, 1e-8);
    }

    if (!accepted) {
      // Projected-gradient backtracking.
      const double gnorm = rep.grad.cwiseAbs().maxCoeff();
      double t = std::min(1.0, opts.initial_radius / std::max(gnorm, 1e-300));
      for (int attempt = 0; attempt < 60; ++attempt, t *= 0.5) {
        const Vec trial = box.project(x - t * rep.grad);
        const Vec s = trial - x;
        if (s.squaredNorm() == 0.0) break;
        const double f_trial = objective.value(trial);
        if (std::isfinite(f_trial) && f_trial <= rep.value + 1e-4 * rep.grad.dot(s) && f_trial < rep.value) {
          accepted = true;
          x_new = trial;
          break;
        }
      }
    }
    if (!accepted) break;  // stalled: no decrease available at machine precision

    x = std::move(x_new);
    rep = objective.evaluate(x);
    if (!std::isfinite(rep.value) || !rep.grad.allFinite()) throw NumericalError("objective became non-finite");
    ++res.iterations;
  }

  res.x_ml = x;
  res.nll_value = rep.value;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] <= box.lower[i] || x[i] >= box.upper[i]) res.active_set.push_back(static_cast<int>(i));
  return res;
}

}  // namespace tt
