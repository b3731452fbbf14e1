#include "ttfilter/filter.hpp"

#include <chrono>
#include <cmath>

#include "ttfilter/metrics.hpp"

namespace tt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PosteriorBelief posterior_from_prior(const PropagatedPrior& prior) {
  PosteriorBelief pb;
  pb.m_x = prior.mean_x;
  pb.m_v = prior.mean_v;
  pb.cov = prior.cov;
  pb.sigma_xx = prior.cov_xx;
  pb.sigma_vx = prior.cov_vx;
  pb.sigma_vv = prior.cov_vv;
  return pb;
}

PosteriorBelief posterior_from_belief(const GaussianBelief& b) {
  const auto n = b.mean.size() / 2;
  PosteriorBelief pb;
  pb.m_x = b.mean.head(n);
  pb.m_v = b.mean.tail(n);
  pb.cov = b.cov;
  pb.sigma_xx = b.cov.topLeftCorner(n, n);
  pb.sigma_vx = b.cov.bottomLeftCorner(n, n);
  pb.sigma_vv = b.cov.bottomRightCorner(n, n);
  return pb;
}

}  // namespace

const std::vector<std::string>& tt_variant_names() {
  static const std::vector<std::string> names = {"tt_nonlinear",  "tt_linear",          "tt_no_hopping",
                                                 "tt_fixed_init", "tt_hopping_no_1by1", "tt_no_hopping_no_1by1"};
  return names;
}

bool is_tt_variant(const std::string& name) {
  for (const auto& n : tt_variant_names())
    if (n == name) return true;
  return name == "tt_baseline";
}

FilterConfig variant_config(const std::string& name, FilterConfig base) {
  base.nonlinear_correction = true;
  base.hopping = true;
  base.one_by_one = true;
  base.fixed_init = false;
  if (name == "tt_nonlinear" || name == "tt_baseline") {
  } else if (name == "tt_linear") {
    base.nonlinear_correction = false;
  } else if (name == "tt_no_hopping") {
    base.hopping = false;
  } else if (name == "tt_fixed_init") {
    base.fixed_init = true;
  } else if (name == "tt_hopping_no_1by1") {
    base.one_by_one = false;
  } else if (name == "tt_no_hopping_no_1by1") {
    base.hopping = false;
    base.one_by_one = false;
  } else {
    throw ConfigError("unknown filter variant '" + name + "'");
  }
  return base;
}

double TrackRecord::mean_omat() const {
  if (steps.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : steps) sum += s.omat;
  return sum / static_cast<double>(steps.size());
}

double TrackRecord::mean_seconds() const {
  if (steps.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : steps) sum += s.seconds;
  return sum / static_cast<double>(steps.size());
}

int TrackRecord::failures() const {
  int n = 0;
  for (const auto& s : steps) n += s.failed ? 1 : 0;
  return n;
}

TtFilter::TtFilter(const Scenario& scenario, FilterConfig cfg)
    : scenario_(&scenario),
      cfg_(std::move(cfg)),
      noise_(FilterNoiseModel::with_alpha(cfg_.alpha)),
      rule_(radial_rule(2 * scenario.target_count())),
      dirs_(simplex_directions(2 * scenario.target_count())),
      box_(BoxConstraints::around_grid(scenario.grid, scenario.target_count(), cfg_.box_margin * scenario.grid.spacing)) {
  scenario.measurement.validate(scenario.grid.count());
  cfg_.consistency.validate(scenario.target_count(), (scenario.grid.rows - 1) * (scenario.grid.cols - 1));
}

OptimizeResult TtFilter::estimate(const CombinedNll& nll, const Vec& start, ConsistencyCheck& initial,
                                  ConsistencyCheck& final_check, std::vector<std::string>& actions) const {
  const Scenario& sc = *scenario_;
  OptimizeResult best = minimize(Objective::from(nll), start, box_, cfg_.optimizer);
  initial = is_consistent(best.x_ml, nll.frame(), sc.grid, sc.measurement, cfg_.consistency);
  if (!nll.uses_measurements()) initial.statistic = 0.0, initial.consistent = true;
  final_check = initial;
  if (final_check.consistent) return best;

  auto consider = [&](RecoveryResult&& r) {
    if (r.passed || r.result.nll_value < best.nll_value) {
      best = std::move(r.result);
      final_check = r.check;
    }
  };
  if (cfg_.one_by_one) {
    actions.emplace_back("one_by_one");
    consider(one_by_one_recovery(nll.frame(), sc.grid, sc.measurement, nll.prior(), box_, cfg_.consistency,
                                 cfg_.optimizer));
  }
  if (!final_check.consistent && cfg_.hopping) {
    actions.emplace_back("square_hopping");
    consider(square_hopping_recovery(best.x_ml, nll.frame(), sc.grid, sc.measurement, nll.prior(), box_,
                                     cfg_.consistency, cfg_.optimizer));
  }
  if (!final_check.consistent) actions.emplace_back("inconsistent");
  return best;
}

StepOutput TtFilter::step(const GaussianBelief& belief, const MeasurementFrame& frame) const {
  const auto t0 = Clock::now();
  const Scenario& sc = *scenario_;
  StepOutput out;

  PropagatedPrior prior;
  try {
    prior = propagate_prior(belief, noise_);
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
    out.posterior = posterior_from_belief(belief);
    out.x_ml = out.posterior.m_x;
    out.seconds = seconds_since(t0);
    return out;
  }

  try {
    const CombinedNll nll(frame, sc.grid, sc.measurement, prior, {}, cfg_.use_measurements);
    const OptimizeResult ml = estimate(nll, prior.mean_x, out.initial_check, out.final_check, out.actions);

    const HessianRepair repair =
        repair_hessian(ml.x_ml, frame, sc.grid, sc.measurement, prior, box_, cfg_.optimizer, cfg_.use_measurements);
    out.exclusions = repair.exclusions;
    if (!repair.exclusions.pairs.empty()) out.actions.emplace_back("hessian_repair");
    out.x_ml = repair.x_ml;

    SigmaPointSet points = generate_sigma_points(repair.x_ml, repair.hessian, rule_, dirs_);
    if (cfg_.nonlinear_correction) {
      const double threshold = cfg_.near_sensor_fraction * sc.grid.spacing;
      Mat cov;
      for (int c = 0; c < sc.target_count(); ++c) {
        const Vec2 pos = target_position(repair.x_ml, c);
        const int s = sc.grid.nearest_sensor(pos);
        if ((pos - sc.grid.sensor(s)).norm() >= threshold) continue;
        if (cov.size() == 0) cov = repair.hessian.llt().solve(Mat::Identity(repair.hessian.rows(), repair.hessian.cols()));
        const Mat2 block = cov.block<2, 2>(2 * c, 2 * c);
        if (polar_sigma_adjust(points, repair.x_ml, c, sc.grid.sensor(s), block, rule_, dirs_))
          ++out.polar_adjusted;
        else
          out.actions.emplace_back("polar_fallback");
      }
    }
    assign_weights(points, [&nll](const Vec& x) { return nll.value(x); });

    const SpatialMoments sm = spatial_moments(points);
    const VelocityMoments vm = velocity_moments(prior, sm.mean, sm.cov);
    out.posterior = assemble(sm.mean, vm.m_v, sm.cov, vm.sigma_vv, vm.sigma_vx);
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
    out.posterior = posterior_from_prior(prior);
    if (out.x_ml.size() == 0) out.x_ml = prior.mean_x;
  }
  out.seconds = seconds_since(t0);
  return out;
}

GaussianBelief init_belief(InitMode mode, const Scenario& scenario, const Trajectory& trajectory,
                           const FilterConfig& cfg, Rng& rng) {
  const int n_targets = scenario.target_count();
  const int n = 2 * n_targets;
  GaussianBelief b;
  b.cov = Mat::Zero(2 * n, 2 * n);
  b.cov.diagonal().head(n).setConstant(cfg.init.spatial_var);
  b.cov.diagonal().tail(n).setConstant(cfg.init.velocity_var);

  if (mode == InitMode::RandomAroundTruth) {
    b.mean.resize(2 * n);
    b.mean << trajectory.initial.positions(), trajectory.initial.velocities();
    b.mean += b.cov.diagonal().cwiseSqrt().cwiseProduct(standard_normal(rng, 2 * n));
    return b;
  }

  const Vec2 center = scenario.grid.sensor(scenario.grid.index(scenario.grid.rows / 2, scenario.grid.cols / 2));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  b.mean = Vec::Zero(2 * n);
  for (int c = 0; c < n_targets; ++c) {
    const double r = cfg.init.fixed_radius * std::sqrt(unit(rng));
    const double phi = 2.0 * M_PI * unit(rng);
    b.mean.segment<2>(2 * c) = center + r * Vec2(std::cos(phi), std::sin(phi));
  }
  if (trajectory.frames.empty()) return b;

  // ML acquisition against the first frame, with the disk belief as prior.
  const TtFilter filter(scenario, cfg);
  const PropagatedPrior prior = prior_from_belief(b);
  const CombinedNll nll(trajectory.frames.front(), scenario.grid, scenario.measurement, prior);
  ConsistencyCheck initial, final_check;
  std::vector<std::string> actions;
  const OptimizeResult ml = filter.estimate(nll, b.mean.head(n), initial, final_check, actions);
  b.mean.head(n) = ml.x_ml;
  return b;
}

StepOutput step(const GaussianBelief& belief, const MeasurementFrame& frame, const Scenario& scenario,
                const FilterConfig& cfg) {
  return TtFilter(scenario, cfg).step(belief, frame);
}

TrackRecord track(const Trajectory& trajectory, const Scenario& scenario, const FilterConfig& cfg,
                  std::uint64_t seed, std::vector<StepOutput>* outputs) {
  const TtFilter filter(scenario, cfg);
  Rng init_rng = make_stream(seed, 0, "init");
  GaussianBelief belief = init_belief(cfg.init_mode(), scenario, trajectory, cfg, init_rng);

  TrackRecord rec;
  rec.steps.reserve(static_cast<std::size_t>(trajectory.steps()));
  for (int t = 0; t < trajectory.steps(); ++t) {
    StepOutput out = filter.step(belief, trajectory.frames[static_cast<std::size_t>(t)]);
    StepRecord sr;
    sr.t = t + 1;
    sr.truth = trajectory.states[static_cast<std::size_t>(t)].positions();
    sr.estimate = out.posterior.m_x;
    sr.cov = out.posterior.cov;
    sr.omat = omat(sr.estimate, sr.truth).value;
    sr.seconds = out.seconds;
    sr.failed = out.failed;
    sr.recovered = !out.initial_check.consistent;
    rec.steps.push_back(std::move(sr));
    belief = out.posterior.to_belief();
    if (outputs) outputs->push_back(std::move(out));
  }
  return rec;
}

}  // namespace tt
