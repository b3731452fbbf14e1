#include "ttfilter/experiment.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

namespace tt {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_point(std::ostream& out, const SweepPoint& p) {
  out << num(p.sigma_s2) << ',' << num(p.alpha) << ',' << num(p.gamma) << ',';
}

// All variants of one (point, track) unit, in the order of ExperimentSpec::variants.
std::vector<TrackResult> run_unit(const ExperimentSpec& spec, const SweepPoint& point, int track) {
  const ExperimentSpec local = spec.at(point);
  const std::uint64_t seed = track_seed(spec.seed, track);
  std::vector<TrackResult> out;
  out.reserve(spec.variants.size());
  for (const auto& v : spec.variants) {
    TrackResult r;
    r.point = point;
    r.variant = v;
    r.track = track;
    r.seed = seed;
    r.record.variant = v;
    out.push_back(std::move(r));
  }

  Trajectory traj;
  GaussianBelief initial;
  try {
    traj = simulate(local.scenario, spec.steps, seed);
    Rng init_rng = make_stream(seed, 0, "init");
    initial = init_belief(InitMode::RandomAroundTruth, local.scenario, traj, local.filter, init_rng);
  } catch (const std::exception& e) {
    for (auto& r : out) r.error = e.what();
    return out;
  }

  for (auto& r : out) {
    try {
      if (r.variant == "bpf") {
        r.record = bpf_track(traj, local.scenario, local.bpf, FilterNoiseModel::with_alpha(local.filter.alpha),
                             initial, seed, &r.weight_collapses);
      } else {
        r.record = tt::track(traj, local.scenario, variant_config(r.variant, local.filter), seed);
      }
      r.record.variant = r.variant;
    } catch (const std::exception& e) {
      r.record.steps.clear();
      r.error = e.what();
    }
  }
  return out;
}

std::vector<VariantSummary> summarize(const ExperimentSpec& spec, const std::vector<SweepPoint>& points,
                                      const std::vector<TrackResult>& tracks) {
  std::vector<VariantSummary> out;
  for (const auto& p : points)
    for (const auto& v : spec.variants) {
      VariantSummary s;
      s.point = p;
      s.variant = v;
      s.omat_per_step.assign(static_cast<std::size_t>(spec.steps), 0.0);
      double omat_sum = 0.0, sec_sum = 0.0;
      for (const auto& t : tracks) {
        if (!(t.point == p) || t.variant != v) continue;
        if (!t.error.empty()) {
          ++s.failed_tracks;
          continue;
        }
        ++s.tracks;
        s.failed_steps += t.record.failures();
        omat_sum += t.record.mean_omat();
        sec_sum += t.record.mean_seconds();
        for (std::size_t k = 0; k < t.record.steps.size() && k < s.omat_per_step.size(); ++k)
          s.omat_per_step[k] += t.record.steps[k].omat;
      }
      if (s.tracks > 0) {
        s.average_omat = omat_sum / s.tracks;
        s.mean_step_seconds = sec_sum / s.tracks;
        for (double& x : s.omat_per_step) x /= s.tracks;
      }
      out.push_back(std::move(s));
    }
  return out;
}

}  // namespace

std::uint64_t track_seed(std::uint64_t seed, int track) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(track)));
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::vector<SweepPoint>& points) {
  spec.validate();
  if (points.empty()) throw ConfigError("no sweep points");
  for (const auto& p : points) spec.at(p).validate();

  const std::size_t n_units = points.size() * static_cast<std::size_t>(spec.tracks);
  std::vector<std::vector<TrackResult>> units(n_units);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next++; u < n_units; u = next++) {
      const std::size_t p = u / static_cast<std::size_t>(spec.tracks);
      const int k = static_cast<int>(u % static_cast<std::size_t>(spec.tracks));
      units[u] = run_unit(spec, points[p], k);
    }
  };
  const int n_threads = std::min<int>(spec.jobs, static_cast<int>(n_units));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  for (auto& u : units)
    for (auto& r : u) result.tracks.push_back(std::move(r));
  result.summaries = summarize(spec, points, result.tracks);
  return result;
}

void write_steps_csv(const ExperimentResult& result, std::ostream& out) {
  out << "sigma_s2,alpha,gamma,variant,track,step,omat,failed\n";
  for (const auto& t : result.tracks)
    for (const auto& s : t.record.steps) {
      write_point(out, t.point);
      out << t.variant << ',' << t.track << ',' << s.t << ',' << num(s.omat) << ',' << (s.failed ? 1 : 0) << '\n';
    }
}

void write_per_step_csv(const ExperimentResult& result, std::ostream& out) {
  out << "sigma_s2,alpha,gamma,variant,step,omat,tracks\n";
  for (const auto& s : result.summaries) {
    if (s.tracks == 0) continue;
    for (std::size_t k = 0; k < s.omat_per_step.size(); ++k) {
      write_point(out, s.point);
      out << s.variant << ',' << k + 1 << ',' << num(s.omat_per_step[k]) << ',' << s.tracks << '\n';
    }
  }
}

nlohmann::json summary_json(const ExperimentResult& result, const ExperimentSpec& spec) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : result.summaries) {
    rows.push_back({{"sigma_s2", s.point.sigma_s2},
                    {"alpha", s.point.alpha},
                    {"gamma", s.point.gamma},
                    {"variant", s.variant},
                    {"tracks", s.tracks},
                    {"failed_tracks", s.failed_tracks},
                    {"failed_steps", s.failed_steps},
                    {"average_omat", s.average_omat},
                    {"mean_step_seconds", s.mean_step_seconds},
                    {"omat_per_step", s.omat_per_step}});
  }
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& t : result.tracks)
    if (!t.error.empty())
      errors.push_back({{"sigma_s2", t.point.sigma_s2},
                        {"alpha", t.point.alpha},
                        {"gamma", t.point.gamma},
                        {"variant", t.variant},
                        {"track", t.track},
                        {"error", t.error}});
  return {{"config", spec_to_json(spec)}, {"summary", rows}, {"track_errors", errors}};
}

void write_outputs(const ExperimentResult& result, const ExperimentSpec& spec, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());

  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw IoError("cannot write '" + (fs::path(dir) / name).string() + "'");
    return f;
  };
  {
    auto f = open("steps.csv");
    write_steps_csv(result, f);
    if (!f) throw IoError("write failed for steps.csv");
  }
  {
    auto f = open("omat_per_step.csv");
    write_per_step_csv(result, f);
    if (!f) throw IoError("write failed for omat_per_step.csv");
  }
  {
    auto f = open("summary.json");
    f << summary_json(result, spec).dump(2) << '\n';
    if (!f) throw IoError("write failed for summary.json");
  }
}

}  // namespace tt
