#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttfilter/config.hpp"

namespace tt {

struct TrackResult {
  SweepPoint point;
  std::string variant;
  int track = 0;
  std::uint64_t seed = 0;
  TrackRecord record;
  /// Non-empty when the track could not be run at all.
  std::string error;
  int weight_collapses = 0;
};

struct VariantSummary {
  SweepPoint point;
  std::string variant;
  int tracks = 0;         // tracks that produced a record
  int failed_tracks = 0;  // tracks that raised before producing one
  int failed_steps = 0;
  double average_omat = 0.0;
  double mean_step_seconds = 0.0;
  std::vector<double> omat_per_step;
};

struct ExperimentResult {
  /// Ordered by sweep point, then track, then variant as listed in the spec.
  std::vector<TrackResult> tracks;
  std::vector<VariantSummary> summaries;
};

/// Seed of track k; shared by every variant and sweep point.
std::uint64_t track_seed(std::uint64_t seed, int track);

/// Runs every variant on the same simulated trajectories and initial
/// beliefs. Scenario generation is excluded from step timing. Work is
/// split over spec.jobs threads by (point, track); output order does not
/// depend on the thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::vector<SweepPoint>& points);

/// Per-track, per-step long-format rows:
/// sigma_s2,alpha,gamma,variant,track,step,omat,failed
void write_steps_csv(const ExperimentResult& result, std::ostream& out);

/// Track-averaged rows: sigma_s2,alpha,gamma,variant,step,omat,tracks
void write_per_step_csv(const ExperimentResult& result, std::ostream& out);

nlohmann::json summary_json(const ExperimentResult& result, const ExperimentSpec& spec);

/// Writes steps.csv, omat_per_step.csv and summary.json into dir,
/// creating it if needed. Throws IoError on failure.
void write_outputs(const ExperimentResult& result, const ExperimentSpec& spec, const std::string& dir);

}  // namespace tt
