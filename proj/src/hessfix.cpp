#include "ttfilter/hessfix.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

namespace tt {

bool ExclusionList::contains(int target, int sensor) const {
  return std::find(pairs.begin(), pairs.end(), std::make_pair(target, sensor)) != pairs.end();
}

std::vector<int> ExclusionList::targets() const {
  std::set<int> s;
  for (const auto& p : pairs) s.insert(p.first);
  return {s.begin(), s.end()};
}

std::vector<int> ExclusionList::sensors() const {
  std::set<int> s;
  for (const auto& p : pairs) s.insert(p.second);
  return {s.begin(), s.end()};
}

namespace {

Vec gather(const Vec& full, const std::vector<int>& idx) {
  Vec out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[idx[i]];
  return out;
}

Mat gather(const Mat& full, const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Mat out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = full(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

Vec scatter(Vec full, const std::vector<int>& idx, const Vec& part) {
  for (std::size_t i = 0; i < idx.size(); ++i) full[idx[i]] = part[static_cast<Eigen::Index>(i)];
  return full;
}

}  // namespace

HessianRepair repair_hessian(const Vec& x_ml, const MeasurementFrame& frame, const SensorGrid& grid,
                             const MeasurementModel& mm, const PropagatedPrior& prior, const BoxConstraints& box,
                             const OptimizerOptions& opts, bool use_measurements) {
  const CombinedNll full(frame, grid, mm, prior, {}, use_measurements);
  HessianRepair out;
  out.x_ml = x_ml;
  out.hessian = full.evaluate(x_ml).hess;
  if (is_positive_definite(out.hessian)) return out;

  const int n_targets = static_cast<int>(x_ml.size() / 2);
  const int max_pairs = n_targets * grid.count();
  while (static_cast<int>(out.exclusions.pairs.size()) < max_pairs) {
    // Closest pair not yet excluded, measured at the current estimate.
    int best_c = -1, best_s = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_targets; ++c)
      for (int s = 0; s < grid.count(); ++s) {
        if (out.exclusions.contains(c, s)) continue;
        const double d = (target_position(out.x_ml, c) - grid.sensor(s)).norm();
        if (d < best_d) {
          best_d = d;
          best_c = c;
          best_s = s;
        }
      }
    out.exclusions.pairs.emplace_back(best_c, best_s);

    const std::vector<int> ex_targets = out.exclusions.targets();
    if (static_cast<int>(ex_targets.size()) == n_targets)
      throw NumericalError("Hessian repair excluded every target (" + std::to_string(out.exclusions.pairs.size()) +
                           " pairs) without reaching positive definiteness");

    SensorMask mask(static_cast<std::size_t>(grid.count()), 1);
    for (int s : out.exclusions.sensors()) mask[static_cast<std::size_t>(s)] = 0;
    const CombinedNll reduced_nll = full.with_mask(mask);

    std::vector<int> free;
    for (int c = 0; c < n_targets; ++c)
      if (!std::binary_search(ex_targets.begin(), ex_targets.end(), c)) {
        free.push_back(2 * c);
        free.push_back(2 * c + 1);
      }

    const Vec frozen = out.x_ml;
    Objective reduced;
    reduced.value = [&](const Vec& y) { return reduced_nll.value(scatter(frozen, free, y)); };
    reduced.evaluate = [&](const Vec& y) {
      NllReport r = reduced_nll.evaluate(scatter(frozen, free, y));
      return NllReport{r.value, gather(r.grad, free), gather(r.hess, free)};
    };
    const BoxConstraints reduced_box{gather(box.lower, free), gather(box.upper, free)};
    const OptimizeResult r = minimize(reduced, gather(frozen, free), reduced_box, opts);
    out.x_ml = scatter(frozen, free, r.x_ml);

    const Mat h_reduced = gather(reduced_nll.evaluate(out.x_ml).hess, free);
    if (!is_positive_definite(h_reduced)) continue;

    const double fixed = 1.0 / (mm.d0 * mm.d0);
    out.hessian = Mat::Zero(2 * n_targets, 2 * n_targets);
    for (std::size_t i = 0; i < free.size(); ++i)
      for (std::size_t j = 0; j < free.size(); ++j)
        out.hessian(free[i], free[j]) = h_reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    for (int c : ex_targets) {
      out.hessian(2 * c, 2 * c) = fixed;
      out.hessian(2 * c + 1, 2 * c + 1) = fixed;
    }
    return out;
  }
  throw NumericalError("Hessian repair exhausted every target-sensor pair");
}

}  // namespace tt
