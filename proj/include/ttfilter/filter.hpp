#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttfilter/consistency.hpp"
#include "ttfilter/hessfix.hpp"
#include "ttfilter/model.hpp"
#include "ttfilter/moments.hpp"
#include "ttfilter/nll.hpp"
#include "ttfilter/optimizer.hpp"
#include "ttfilter/quadrature.hpp"

namespace tt {

enum class InitMode { RandomAroundTruth, FixedCenter };

struct InitConfig {
  double spatial_var = 100.0;
  double velocity_var = 0.0005;
  double fixed_radius = 5.0;  // meters around the central sensor
};

struct FilterConfig {
  bool nonlinear_correction = true;
  bool hopping = true;
  bool one_by_one = true;
  bool fixed_init = false;
  /// false drops the measurement term entirely (prior-only limit).
  bool use_measurements = true;
  double alpha = 3.0;
  /// Polar correction applies when a target is closer than this fraction
  /// of the grid spacing to its nearest sensor.
  double near_sensor_fraction = 0.2;
  /// Optimization box: grid extent widened by this many grid spacings.
  /// Targets never leave the sensed region, so the default is the extent itself.
  double box_margin = 0.0;
  ConsistencyConfig consistency;
  OptimizerOptions optimizer;
  InitConfig init;

  InitMode init_mode() const { return fixed_init ? InitMode::FixedCenter : InitMode::RandomAroundTruth; }
};

/// Canonical variant names: tt_nonlinear (baseline), tt_linear,
/// tt_no_hopping, tt_fixed_init, tt_hopping_no_1by1, tt_no_hopping_no_1by1.
FilterConfig variant_config(const std::string& name, FilterConfig base = {});
bool is_tt_variant(const std::string& name);
const std::vector<std::string>& tt_variant_names();

struct StepOutput {
  PosteriorBelief posterior;
  Vec x_ml;
  ConsistencyCheck initial_check;
  ConsistencyCheck final_check;
  std::vector<std::string> actions;
  ExclusionList exclusions;
  int polar_adjusted = 0;
  bool failed = false;
  std::string error;
  double seconds = 0.0;
};

struct StepRecord {
  int t = 0;
  Vec truth;     // stacked positions
  Vec estimate;  // stacked positions
  Mat cov;       // full posterior covariance
  double omat = 0.0;
  double seconds = 0.0;
  bool failed = false;
  bool recovered = false;
};

struct TrackRecord {
  std::string variant;
  std::vector<StepRecord> steps;

  double mean_omat() const;
  double mean_seconds() const;
  int failures() const;
};

/// One TT-filter configuration bound to a scenario. The radial rule and
/// direction set are built once for d = 2C.
class TtFilter {
 public:
  TtFilter(const Scenario& scenario, FilterConfig cfg);

  StepOutput step(const GaussianBelief& belief, const MeasurementFrame& frame) const;

  /// Combined-NLL minimization followed by the enabled recovery procedures.
  /// Appends recovery names to `actions`.
  OptimizeResult estimate(const CombinedNll& nll, const Vec& start, ConsistencyCheck& initial,
                          ConsistencyCheck& final_check, std::vector<std::string>& actions) const;

  const FilterConfig& config() const { return cfg_; }
  const FilterNoiseModel& noise_model() const { return noise_; }
  const BoxConstraints& box() const { return box_; }
  const Scenario& scenario() const { return *scenario_; }

 private:
  const Scenario* scenario_;
  FilterConfig cfg_;
  FilterNoiseModel noise_;
  RadialRule rule_;
  DirectionSet dirs_;
  BoxConstraints box_;
};

/// Initial belief. Random mode samples the mean around the true initial
/// state; fixed mode places targets within a disk about the central sensor
/// and refines the positions by ML estimation against `first_frame`.
GaussianBelief init_belief(InitMode mode, const Scenario& scenario, const Trajectory& trajectory,
                           const FilterConfig& cfg, Rng& rng);

StepOutput step(const GaussianBelief& belief, const MeasurementFrame& frame, const Scenario& scenario,
                const FilterConfig& cfg);

/// Runs the filter over every frame. The same seed gives the same initial
/// belief regardless of variant.
TrackRecord track(const Trajectory& trajectory, const Scenario& scenario, const FilterConfig& cfg,
                  std::uint64_t seed, std::vector<StepOutput>* outputs = nullptr);

}  // namespace tt
