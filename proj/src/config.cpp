#include "ttfilter/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>

namespace tt {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("'" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in '" + section + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_axis(const json& j, const char* key, std::vector<double>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (v.is_number()) {
    out = {v.get<double>()};
  } else {
    read(j, key, out);
  }
}

json vec_to_json(const Vec& v) {
  if (v.size() == 1) return v[0];
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

SweepPoint ExperimentSpec::base_point() const {
  const Vec& s2 = scenario.measurement.sigma_s2;
  return {s2.size() == 1 ? s2[0] : s2.mean(), filter.alpha, scenario.motion.gamma};
}

std::vector<SweepPoint> ExperimentSpec::sweep_points() const {
  const SweepPoint base = base_point();
  std::vector<SweepPoint> pts;
  auto add = [&pts](const SweepPoint& p) {
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
  };
  if (sweep.mode == SweepMode::Grid) {
    for (double s : sweep.sigma_s2)
      for (double a : sweep.alpha)
        for (double g : sweep.gamma) add({s, a, g});
    return pts;
  }
  for (double s : sweep.sigma_s2) add({s, base.alpha, base.gamma});
  for (double a : sweep.alpha) add({base.sigma_s2, a, base.gamma});
  for (double g : sweep.gamma) add({base.sigma_s2, base.alpha, g});
  if (pts.empty()) add(base);
  return pts;
}

ExperimentSpec ExperimentSpec::at(const SweepPoint& p) const {
  ExperimentSpec out = *this;
  // A per-sensor variance list survives only at its own base point.
  if (p.sigma_s2 != base_point().sigma_s2)
    out.scenario.measurement.sigma_s2 = Vec::Constant(1, p.sigma_s2);
  out.filter.alpha = p.alpha;
  out.scenario.motion = MotionModel::constant_velocity(p.gamma);
  return out;
}

void ExperimentSpec::validate() const {
  if (variants.empty()) throw ConfigError("variant list is empty");
  for (const auto& v : variants)
    if (v != "bpf" && !is_tt_variant(v)) throw ConfigError("unknown variant '" + v + "'");
  if (tracks < 1) throw ConfigError("tracks must be positive");
  if (steps < 1) throw ConfigError("steps must be positive");
  if (jobs < 1) throw ConfigError("jobs must be positive");
  if (bpf.particles < 1) throw ConfigError("bpf.particles must be at least 1");
  if (!(bpf.ess_fraction >= 0.0 && bpf.ess_fraction <= 1.0)) throw ConfigError("bpf.ess_fraction must lie in [0, 1]");
  if (scenario.target_count() < 1) throw ConfigError("at least one target is required");
  if (!(filter.alpha > 0.0)) throw ConfigError("filter.alpha must be positive");
  if (!(filter.near_sensor_fraction >= 0.0)) throw ConfigError("filter.near_sensor_fraction must be non-negative");
  if (!(filter.box_margin >= 0.0)) throw ConfigError("filter.box_margin must be non-negative");
  if (!(scenario.motion.gamma >= 0.0)) throw ConfigError("motion.gamma must be non-negative");
  scenario.measurement.validate(scenario.grid.count());
  filter.consistency.validate(scenario.target_count(), (scenario.grid.rows - 1) * (scenario.grid.cols - 1));
  for (const auto* axis : {&sweep.sigma_s2, &sweep.alpha})
    for (double v : *axis)
      if (!(v > 0.0)) throw ConfigError("sweep values for sigma_s2 and alpha must be positive");
  for (double v : sweep.gamma)
    if (!(v >= 0.0)) throw ConfigError("sweep values for gamma must be non-negative");
}

ExperimentSpec spec_from_json(const json& j, ExperimentSpec spec) {
  require_keys(j, "root", {"grid", "targets", "measurement", "motion", "simulation", "filter", "bpf", "experiment"});

  if (j.contains("grid")) {
    const json& g = j["grid"];
    require_keys(g, "grid", {"rows", "cols", "spacing"});
    int rows = spec.scenario.grid.rows, cols = spec.scenario.grid.cols;
    double spacing = spec.scenario.grid.spacing;
    read(g, "rows", rows);
    read(g, "cols", cols);
    read(g, "spacing", spacing);
    spec.scenario.grid = build_grid(rows, cols, spacing);
  }

  if (j.contains("targets")) {
    const json& t = j["targets"];
    require_keys(t, "targets", {"initial"});
    if (t.contains("initial")) {
      std::vector<std::vector<double>> rows;
      read(t, "initial", rows);
      if (rows.empty()) throw ConfigError("targets.initial must list at least one target");
      spec.scenario.initial.targets.resize(4, static_cast<Eigen::Index>(rows.size()));
      for (std::size_t c = 0; c < rows.size(); ++c) {
        if (rows[c].size() != 4) throw ConfigError("each target needs [x, y, vx, vy]");
        for (int i = 0; i < 4; ++i) spec.scenario.initial.targets(i, static_cast<Eigen::Index>(c)) = rows[c][static_cast<std::size_t>(i)];
      }
    }
  }

  if (j.contains("measurement")) {
    const json& m = j["measurement"];
    require_keys(m, "measurement", {"amplitude", "d0", "exponent", "sigma_s2"});
    MeasurementModel& mm = spec.scenario.measurement;
    read(m, "amplitude", mm.amplitude);
    read(m, "d0", mm.d0);
    read(m, "exponent", mm.exponent);
    if (m.contains("sigma_s2")) {
      std::vector<double> v;
      read_axis(m, "sigma_s2", v);
      mm.sigma_s2 = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
  }

  if (j.contains("motion")) {
    const json& m = j["motion"];
    require_keys(m, "motion", {"gamma"});
    double gamma = spec.scenario.motion.gamma;
    read(m, "gamma", gamma);
    spec.scenario.motion = MotionModel::constant_velocity(gamma);
  }

  if (j.contains("simulation")) {
    const json& s = j["simulation"];
    require_keys(s, "simulation", {"require_inside", "max_attempts"});
    read(s, "require_inside", spec.scenario.require_inside);
    read(s, "max_attempts", spec.scenario.max_attempts);
  }

  if (j.contains("filter")) {
    const json& f = j["filter"];
    require_keys(f, "filter",
                 {"alpha", "near_sensor_fraction", "box_margin", "use_measurements", "consistency", "optimizer", "init"});
    FilterConfig& fc = spec.filter;
    read(f, "alpha", fc.alpha);
    read(f, "near_sensor_fraction", fc.near_sensor_fraction);
    read(f, "box_margin", fc.box_margin);
    read(f, "use_measurements", fc.use_measurements);
    if (f.contains("consistency")) {
      const json& c = f["consistency"];
      require_keys(c, "filter.consistency", {"p_value", "n_bad_tgt", "n_bad_sq", "max_subsets"});
      read(c, "p_value", fc.consistency.p_value);
      read(c, "n_bad_tgt", fc.consistency.n_bad_tgt);
      read(c, "n_bad_sq", fc.consistency.n_bad_sq);
      read(c, "max_subsets", fc.consistency.max_subsets);
    }
    if (f.contains("optimizer")) {
      const json& o = f["optimizer"];
      require_keys(o, "filter.optimizer", {"gradient_tolerance", "max_iterations", "initial_radius", "max_radius"});
      read(o, "gradient_tolerance", fc.optimizer.gradient_tolerance);
      read(o, "max_iterations", fc.optimizer.max_iterations);
      read(o, "initial_radius", fc.optimizer.initial_radius);
      read(o, "max_radius", fc.optimizer.max_radius);
    }
    if (f.contains("init")) {
      const json& i = f["init"];
      require_keys(i, "filter.init", {"spatial_var", "velocity_var", "fixed_radius"});
      read(i, "spatial_var", fc.init.spatial_var);
      read(i, "velocity_var", fc.init.velocity_var);
      read(i, "fixed_radius", fc.init.fixed_radius);
    }
  }

  if (j.contains("bpf")) {
    const json& b = j["bpf"];
    require_keys(b, "bpf", {"particles", "ess_fraction"});
    read(b, "particles", spec.bpf.particles);
    read(b, "ess_fraction", spec.bpf.ess_fraction);
  }

  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    require_keys(e, "experiment", {"variants", "tracks", "steps", "seed", "jobs", "sweep"});
    read(e, "variants", spec.variants);
    read(e, "tracks", spec.tracks);
    read(e, "steps", spec.steps);
    read(e, "seed", spec.seed);
    read(e, "jobs", spec.jobs);
    if (e.contains("sweep")) {
      const json& s = e["sweep"];
      require_keys(s, "experiment.sweep", {"mode", "sigma_s2", "alpha", "gamma"});
      if (s.contains("mode")) {
        std::string mode;
        read(s, "mode", mode);
        if (mode == "one_at_a_time")
          spec.sweep.mode = SweepMode::OneAtATime;
        else if (mode == "grid")
          spec.sweep.mode = SweepMode::Grid;
        else
          throw ConfigError("experiment.sweep.mode must be 'one_at_a_time' or 'grid'");
      }
      read_axis(s, "sigma_s2", spec.sweep.sigma_s2);
      read_axis(s, "alpha", spec.sweep.alpha);
      read_axis(s, "gamma", spec.sweep.gamma);
    }
  }

  spec.validate();
  return spec;
}

json spec_to_json(const ExperimentSpec& spec) {
  const Scenario& sc = spec.scenario;
  std::vector<std::vector<double>> initial;
  for (int c = 0; c < sc.target_count(); ++c) {
    const Vec4 t = sc.initial.targets.col(c);
    initial.push_back({t[0], t[1], t[2], t[3]});
  }
  const FilterConfig& f = spec.filter;
  return json{
      {"grid", {{"rows", sc.grid.rows}, {"cols", sc.grid.cols}, {"spacing", sc.grid.spacing}}},
      {"targets", {{"initial", initial}}},
      {"measurement",
       {{"amplitude", sc.measurement.amplitude},
        {"d0", sc.measurement.d0},
        {"exponent", sc.measurement.exponent},
        {"sigma_s2", vec_to_json(sc.measurement.sigma_s2)}}},
      {"motion", {{"gamma", sc.motion.gamma}}},
      {"simulation", {{"require_inside", sc.require_inside}, {"max_attempts", sc.max_attempts}}},
      {"filter",
       {{"alpha", f.alpha},
        {"near_sensor_fraction", f.near_sensor_fraction},
        {"box_margin", f.box_margin},
        {"use_measurements", f.use_measurements},
        {"consistency",
         {{"p_value", f.consistency.p_value},
          {"n_bad_tgt", f.consistency.n_bad_tgt},
          {"n_bad_sq", f.consistency.n_bad_sq},
          {"max_subsets", f.consistency.max_subsets}}},
        {"optimizer",
         {{"gradient_tolerance", f.optimizer.gradient_tolerance},
          {"max_iterations", f.optimizer.max_iterations},
          {"initial_radius", f.optimizer.initial_radius},
          {"max_radius", f.optimizer.max_radius}}},
        {"init",
         {{"spatial_var", f.init.spatial_var},
          {"velocity_var", f.init.velocity_var},
          {"fixed_radius", f.init.fixed_radius}}}}},
      {"bpf", {{"particles", spec.bpf.particles}, {"ess_fraction", spec.bpf.ess_fraction}}},
      {"experiment",
       {{"variants", spec.variants},
        {"tracks", spec.tracks},
        {"steps", spec.steps},
        {"seed", spec.seed},
        {"jobs", spec.jobs},
        {"sweep",
         {{"mode", spec.sweep.mode == SweepMode::Grid ? "grid" : "one_at_a_time"},
          {"sigma_s2", spec.sweep.sigma_s2},
          {"alpha", spec.sweep.alpha},
          {"gamma", spec.sweep.gamma}}}}}};
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return spec_from_json(j);
}

}  // namespace tt
