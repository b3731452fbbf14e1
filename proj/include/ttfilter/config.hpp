#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttfilter/filter.hpp"
#include "ttfilter/metrics.hpp"

namespace tt {

enum class SweepMode {
  OneAtATime,  // vary each axis alone, others at the scenario value
  Grid,        // full Cartesian product of the axes
};

struct SweepAxes {
  SweepMode mode = SweepMode::OneAtATime;
  std::vector<double> sigma_s2 = {0.0001, 0.001, 0.01, 0.1, 1.0};
  std::vector<double> alpha = {1.0 / 3.0, 1.0, 3.0};
  std::vector<double> gamma = {0.025, 0.05, 0.075, 0.1};
};

struct SweepPoint {
  double sigma_s2 = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;

  bool operator==(const SweepPoint&) const = default;
};

struct ExperimentSpec {
  Scenario scenario = Scenario::standard();
  FilterConfig filter;
  BpfConfig bpf;
  /// TT variant names plus "bpf" for the particle filter baseline.
  std::vector<std::string> variants = {"tt_nonlinear", "tt_linear"};
  SweepAxes sweep;
  int tracks = 50;
  int steps = 40;
  std::uint64_t seed = 1;
  int jobs = 1;

  /// The scenario's own (sigma_s2, alpha, gamma).
  SweepPoint base_point() const;
  /// Points in a fixed order: sigma_s2 outermost, then alpha, then gamma.
  std::vector<SweepPoint> sweep_points() const;
  /// Scenario and filter settings for one sweep point.
  ExperimentSpec at(const SweepPoint& p) const;

  /// Throws ConfigError on an empty variant list, unknown variants,
  /// non-positive counts or invalid model parameters.
  void validate() const;
};

/// Parses the JSON schema documented in the README. Missing keys keep their
/// defaults; unknown keys are rejected.
ExperimentSpec spec_from_json(const nlohmann::json& j, ExperimentSpec base = {});
nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// Throws IoError when the file cannot be read, ConfigError when it does
/// not parse or validate.
ExperimentSpec load_spec(const std::string& path);

}  // namespace tt
