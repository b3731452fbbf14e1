#pragma once

#include <vector>

#include "ttfilter/model.hpp"
#include "ttfilter/types.hpp"

namespace tt {

/// Joint Gaussian over stacked (positions; velocities), length 4C.
struct GaussianBelief {
  Vec mean;
  Mat cov;

  int target_count() const { return static_cast<int>(mean.size() / 4); }
  Vec positions() const { return mean.head(mean.size() / 2); }
  Vec velocities() const { return mean.tail(mean.size() / 2); }
  /// Throws NumericalError when cov is asymmetric or clearly indefinite.
  void validate() const;
};

/// Process noise the filter assumes; its spatial diagonal is alpha.
struct FilterNoiseModel {
  Mat4 v_prime;
  double alpha = 3.0;

  static FilterNoiseModel with_alpha(double alpha);
};

/// Belief pushed one step through the motion model, with the blocks the
/// NLL and the velocity update need.
struct PropagatedPrior {
  Vec mean;
  Mat cov;
  Vec mean_x;
  Vec mean_v;
  Mat cov_xx;
  Mat cov_vx;
  Mat cov_vv;
  Mat cov_xx_inv;

  int target_count() const { return static_cast<int>(mean_x.size() / 2); }
  GaussianBelief as_belief() const { return {mean, cov}; }
};

struct NllReport {
  double value = 0.0;
  Vec grad;
  Mat hess;

  NllReport& operator+=(const NllReport& other);
};

/// Per-sensor inclusion flags; an empty mask selects every sensor.
using SensorMask = std::vector<char>;

/// Expands a per-target 4x4 block (x, y, vx, vy) to the stacked
/// (positions; velocities) layout for C targets.
Mat stacked_per_target(const Mat4& block, int targets);

/// Stacked transition [I I; 0 I] for C targets.
Mat stacked_transition(int targets);

NllReport measurement_nll(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                          const MeasurementModel& mm, const SensorMask& mask = {});

double measurement_nll_value(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                             const MeasurementModel& mm, const SensorMask& mask = {});

PropagatedPrior propagate_prior(const GaussianBelief& belief, const FilterNoiseModel& fm);

/// The belief itself used as a prior, without a motion step.
PropagatedPrior prior_from_belief(const GaussianBelief& belief);

NllReport prior_nll(const Vec& positions, const PropagatedPrior& prior);
double prior_nll_value(const Vec& positions, const PropagatedPrior& prior);

NllReport combined_nll(const Vec& positions, const MeasurementFrame& frame, const SensorGrid& grid,
                       const MeasurementModel& mm, const PropagatedPrior& prior);

/// Combined measurement + prior objective bound to one time step. Holds
/// references; the bound objects must outlive it.
class CombinedNll {
 public:
  CombinedNll(const MeasurementFrame& frame, const SensorGrid& grid, const MeasurementModel& mm,
              const PropagatedPrior& prior, SensorMask mask = {}, bool use_measurements = true)
      : frame_(&frame), grid_(&grid), mm_(&mm), prior_(&prior), mask_(std::move(mask)),
        use_measurements_(use_measurements) {}

  double value(const Vec& positions) const;
  NllReport evaluate(const Vec& positions) const;
  double measurement_value(const Vec& positions) const;

  const SensorMask& mask() const { return mask_; }
  CombinedNll with_mask(SensorMask mask) const {
    return CombinedNll(*frame_, *grid_, *mm_, *prior_, std::move(mask), use_measurements_);
  }
  const MeasurementFrame& frame() const { return *frame_; }
  const SensorGrid& grid() const { return *grid_; }
  const MeasurementModel& measurement_model() const { return *mm_; }
  const PropagatedPrior& prior() const { return *prior_; }
  bool uses_measurements() const { return use_measurements_; }

 private:
  const MeasurementFrame* frame_;
  const SensorGrid* grid_;
  const MeasurementModel* mm_;
  const PropagatedPrior* prior_;
  SensorMask mask_;
  bool use_measurements_;
};

}  // namespace tt
