#pragma once

#include <cstdint>
#include <vector>

#include "ttfilter/filter.hpp"
#include "ttfilter/types.hpp"

namespace tt {

struct OmatResult {
  double value = 0.0;
  /// assignment[i] is the truth index matched to estimate i.
  std::vector<int> assignment;
};

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials). Returns row -> column.
std::vector<int> hungarian(const Mat& cost);

/// Order-1 OMAT between equal-size stacked position sets:
/// (1/C) * min over matchings of the summed Euclidean distances.
OmatResult omat(const Vec& estimates, const Vec& truths);

struct BpfConfig {
  int particles = 100000;
  double ess_fraction = 0.5;  // resample when ESS < ess_fraction * N
};

/// Effective sample size 1 / sum w^2 of normalized weights.
double effective_sample_size(const Vec& weights);

/// Systematic resampling: indices drawn with one uniform offset.
std::vector<int> systematic_resample(const Vec& weights, Rng& rng);

/// Bootstrap particle filter: particles follow the motion model with the
/// filter's assumed noise and are weighted by the Gaussian amplitude
/// likelihood. Particles start from `initial`.
TrackRecord bpf_track(const Trajectory& trajectory, const Scenario& scenario, const BpfConfig& cfg,
                      const FilterNoiseModel& noise, const GaussianBelief& initial, std::uint64_t seed,
                      int* weight_collapses = nullptr);

}  // namespace tt
