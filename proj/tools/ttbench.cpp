// ttbench: scenario simulation, filter runs and parameter sweeps.
//
//   ttbench simulate  --config cfg.json --seed 7 --out run/
//   ttbench track     --variant tt_nonlinear bpf --out run/
//   ttbench benchmark --sigma-s2 0.1 --tracks 50 --variant tt_nonlinear tt_linear bpf
//   ttbench sweep     --tracks 10 --jobs 4
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ttfilter/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::vector<std::string> variants;
  std::optional<int> tracks;
  std::optional<int> steps;
  std::optional<int> jobs;
  std::optional<double> sigma_s2;
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<int> particles;
};

void add_common(CLI::App* cmd, Options& o, bool experiment) {
  cmd->add_option("--config", o.config, "JSON configuration file");
  cmd->add_option("--seed", o.seed, "Base seed (falls back to TT_SEED, then the config)");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--steps", o.steps, "Time steps per track");
  cmd->add_option("--sigma-s2", o.sigma_s2, "Measurement noise variance");
  cmd->add_option("--gamma", o.gamma, "True process noise scale");
  if (!experiment) return;
  cmd->add_option("--variant", o.variants, "Variants to run (tt_nonlinear, tt_linear, ..., bpf)");
  cmd->add_option("--tracks", o.tracks, "Tracks per sweep point");
  cmd->add_option("--jobs", o.jobs, "Worker threads");
  cmd->add_option("--alpha", o.alpha, "Filter process noise scale");
  cmd->add_option("--particles", o.particles, "Particle count for the bpf variant");
}

tt::ExperimentSpec resolve(const Options& o) {
  tt::ExperimentSpec spec = o.config.empty() ? tt::ExperimentSpec{} : tt::load_spec(o.config);
  if (o.seed) {
    spec.seed = *o.seed;
  } else if (const char* env = std::getenv("TT_SEED")) {
    try {
      spec.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw tt::ConfigError(std::string("TT_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  if (!o.variants.empty()) spec.variants = o.variants;
  if (o.tracks) spec.tracks = *o.tracks;
  if (o.steps) spec.steps = *o.steps;
  if (o.jobs) spec.jobs = *o.jobs;
  if (o.sigma_s2) spec.scenario.measurement.sigma_s2 = tt::Vec::Constant(1, *o.sigma_s2);
  if (o.alpha) spec.filter.alpha = *o.alpha;
  if (o.gamma) spec.scenario.motion = tt::MotionModel::constant_velocity(*o.gamma);
  if (o.particles) spec.bpf.particles = *o.particles;
  spec.validate();
  return spec;
}

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw tt::IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::ofstream f(dir / name);
  if (!f) throw tt::IoError("cannot write '" + (dir / name).string() + "'");
  f.precision(17);
  return f;
}

void cmd_simulate(const Options& o) {
  const tt::ExperimentSpec spec = resolve(o);
  const tt::Trajectory traj = tt::simulate(spec.scenario, spec.steps, spec.seed);
  const std::filesystem::path dir(o.out);

  auto tf = open_out(dir, "trajectory.csv");
  tf << "t,c,x,y,vx,vy\n";
  for (int t = 0; t <= traj.steps(); ++t) {
    const tt::TargetState& s = t == 0 ? traj.initial : traj.states[static_cast<std::size_t>(t - 1)];
    for (int c = 0; c < s.count(); ++c)
      tf << t << ',' << c << ',' << s.targets(0, c) << ',' << s.targets(1, c) << ',' << s.targets(2, c) << ','
         << s.targets(3, c) << '\n';
  }
  auto ff = open_out(dir, "frames.csv");
  ff << "t,s,a\n";
  for (int t = 0; t < traj.steps(); ++t) {
    const tt::MeasurementFrame& f = traj.frames[static_cast<std::size_t>(t)];
    for (int s = 0; s < f.size(); ++s) ff << t + 1 << ',' << s << ',' << f[s] << '\n';
  }
  if (!tf || !ff) throw tt::IoError("write failed in '" + dir.string() + "'");
  std::printf("wrote %d steps for %d targets to %s\n", traj.steps(), spec.scenario.target_count(), dir.c_str());
}

void print_summary(const tt::ExperimentResult& r) {
  std::printf("%-10s %-8s %-7s %-24s %7s %12s %14s %8s\n", "sigma_s2", "alpha", "gamma", "variant", "tracks",
              "avg_omat_m", "sec_per_step", "failed");
  for (const auto& s : r.summaries)
    std::printf("%-10g %-8.4g %-7g %-24s %7d %12.4f %14.6f %8d\n", s.point.sigma_s2, s.point.alpha, s.point.gamma,
                s.variant.c_str(), s.tracks, s.average_omat, s.mean_step_seconds, s.failed_steps + s.failed_tracks);
}

void cmd_track(const Options& o) {
  tt::ExperimentSpec spec = resolve(o);
  spec.tracks = 1;
  const tt::ExperimentResult r = tt::run_experiment(spec, {spec.base_point()});
  tt::write_outputs(r, spec, o.out);

  auto ef = open_out(o.out, "estimates.csv");
  ef << "variant,t,c,x_est,y_est,x_true,y_true\n";
  for (const auto& t : r.tracks)
    for (const auto& s : t.record.steps)
      for (int c = 0; c < s.estimate.size() / 2; ++c)
        ef << t.variant << ',' << s.t << ',' << c << ',' << s.estimate[2 * c] << ',' << s.estimate[2 * c + 1] << ','
           << s.truth[2 * c] << ',' << s.truth[2 * c + 1] << '\n';
  if (!ef) throw tt::IoError("write failed for estimates.csv");
  print_summary(r);
}

void cmd_experiment(const Options& o, bool sweep) {
  const tt::ExperimentSpec spec = resolve(o);
  const std::vector<tt::SweepPoint> points = sweep ? spec.sweep_points() : std::vector{spec.base_point()};
  const tt::ExperimentResult r = tt::run_experiment(spec, points);
  tt::write_outputs(r, spec, o.out);
  print_summary(r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multitarget tracking on an amplitude sensor grid"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Write a simulated trajectory and its measurement frames");
  add_common(simulate, o, false);
  auto* track = app.add_subcommand("track", "Run variants on one simulated track");
  add_common(track, o, true);
  auto* benchmark = app.add_subcommand("benchmark", "Average OMAT and step time at one parameter point");
  add_common(benchmark, o, true);
  auto* sweep = app.add_subcommand("sweep", "Benchmark over the configured sweep axes");
  add_common(sweep, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) cmd_simulate(o);
    if (track->parsed()) cmd_track(o);
    if (benchmark->parsed()) cmd_experiment(o, false);
    if (sweep->parsed()) cmd_experiment(o, true);
  } catch (const tt::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const tt::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
