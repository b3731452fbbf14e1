// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance            all criteria
//   acceptance 4 5 7      a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>

#include "ttfilter/experiment.hpp"

using namespace tt;

namespace {

constexpr int kTracks = 25;
constexpr int kSteps = 40;
constexpr std::uint64_t kSeed = 1;

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

ExperimentSpec baseline_spec() {
  ExperimentSpec s;
  s.scenario.measurement.sigma_s2 = Vec::Constant(1, 0.1);
  s.scenario.motion = MotionModel::constant_velocity(0.05);
  s.filter.alpha = 3.0;
  s.tracks = kTracks;
  s.steps = kSteps;
  s.seed = kSeed;
  return s;
}

const VariantSummary& summary_of(const ExperimentResult& r, const std::string& v) {
  for (const auto& s : r.summaries)
    if (s.variant == v) return s;
  throw std::runtime_error("missing variant " + v);
}

// 1 and 2 share one run; 9 reuses the TT timing from it.
double tt_step_seconds = 0.0;

void criteria_1_2() {
  ExperimentSpec s = baseline_spec();
  s.variants = {"tt_nonlinear", "tt_linear", "bpf"};
  s.bpf.particles = 100000;
  const ExperimentResult r = run_experiment(s, {s.base_point()});
  const VariantSummary& non = summary_of(r, "tt_nonlinear");
  const VariantSummary& lin = summary_of(r, "tt_linear");
  const VariantSummary& bpf = summary_of(r, "bpf");
  tt_step_seconds = non.mean_step_seconds;
  report(1, non.tracks >= kTracks && non.average_omat <= 2.0,
         fmt("TT-nonlinear average OMAT %.4f m over %d tracks x %d steps (<= 2.0; %d failed steps)", non.average_omat,
             non.tracks, kSteps, non.failed_steps));
  const bool order = non.average_omat <= lin.average_omat + 0.1 && non.average_omat < bpf.average_omat &&
                     lin.average_omat < bpf.average_omat;
  report(2, order,
         fmt("nonlinear %.4f <= linear %.4f + 0.1; both < BPF(N=1e5) %.4f", non.average_omat, lin.average_omat,
             bpf.average_omat));
}

void criterion_3() {
  ExperimentSpec s = baseline_spec();
  const Scenario& sc = s.scenario;
  struct Arm {
    const char* name;
    bool one_by_one, hopping;
    double omat = 0.0;
  };
  Arm arms[] = {{"both", true, true}, {"one_by_one only", true, false}, {"hopping only", false, true},
                {"none", false, false}};
  for (int k = 0; k < kTracks; ++k) {
    const std::uint64_t seed = track_seed(s.seed, k);
    const Trajectory traj = simulate(sc, kSteps, seed);
    for (Arm& a : arms) {
      FilterConfig cfg = variant_config("tt_fixed_init", s.filter);
      cfg.one_by_one = a.one_by_one;
      cfg.hopping = a.hopping;
      a.omat += track(traj, sc, cfg, seed).mean_omat() / kTracks;
    }
  }
  const double base = arms[0].omat;
  const bool degrades = arms[3].omat > base;
  const bool within = arms[1].omat <= 1.1 * base && arms[2].omat <= 1.1 * base;
  report(3, degrades && within,
         fmt("fixed-centre init: both %.4f, one_by_one only %.4f, hopping only %.4f (<= %.4f), none %.4f (> both)", base,
             arms[1].omat, arms[2].omat, 1.1 * base, arms[3].omat));
}

void criterion_4() {
  Rng rng(4);
  const Scenario sc = baseline_spec().scenario;
  const double h = 1e-6;
  double worst_g = 0.0, worst_h = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Vec x(8), truth(8);
    for (int i = 0; i < 8; ++i) x[i] = uniform(rng, 0.5, 39.5), truth[i] = uniform(rng, 0.0, 40.0);
    MeasurementFrame frame = expected_signal(truth, sc.grid, sc.measurement);
    for (int s = 0; s < frame.size(); ++s) frame[s] += std::sqrt(0.1) * std::normal_distribution<double>()(rng);
    GaussianBelief b;
    b.mean = Vec::Zero(16);
    for (int i = 0; i < 16; ++i) b.mean[i] = i < 8 ? uniform(rng, 0.0, 40.0) : uniform(rng, -0.5, 0.5);
    const Mat a = Mat::NullaryExpr(16, 16, [&] { return std::normal_distribution<double>()(rng); });
    b.cov = a * a.transpose() / 16.0 + 0.1 * Mat::Identity(16, 16);
    const PropagatedPrior prior = propagate_prior(b, FilterNoiseModel::with_alpha(3.0));
    const CombinedNll nll(frame, sc.grid, sc.measurement, prior);
    const NllReport rep = nll.evaluate(x);

    Vec g(8);
    Mat hs(8, 8);
    for (int i = 0; i < 8; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (nll.value(xp) - nll.value(xm)) / (2 * h);
      hs.col(i) = (nll.evaluate(xp).grad - nll.evaluate(xm).grad) / (2 * h);
    }
    worst_g = std::max(worst_g, (g - rep.grad).norm() / rep.grad.norm());
    worst_h = std::max(worst_h, (hs - rep.hess).norm() / rep.hess.norm());
  }
  report(4, worst_g < 1e-5 && worst_h < 1e-4,
         fmt("100 states: max gradient rel err %.3g (< 1e-5), max Hessian rel err %.3g (< 1e-4)", worst_g, worst_h));
}

void criterion_5() {
  Rng rng(5);
  const int d = 8;
  const RadialRule rule = radial_rule(d);
  const DirectionSet dirs = simplex_directions(d);
  const Mat a = Mat::NullaryExpr(d, d, [&] { return std::normal_distribution<double>()(rng); });
  const Mat hs = a * a.transpose() / d + 0.2 * Mat::Identity(d, d);
  Vec m(d);
  for (int i = 0; i < d; ++i) m[i] = uniform(rng, 0.0, 40.0);
  const SigmaPointSet set =
      build_sigma_points(m, hs, rule, dirs, [&](const Vec& x) { return 0.5 * (x - m).dot(hs * (x - m)) + 3.0; });
  const SpatialMoments mom = spatial_moments(set);
  const Mat cov = hs.inverse();
  const double mean_err = (mom.mean - m).norm() / m.norm();
  const double cov_err = (mom.cov - cov).norm() / cov.norm();
  const double w_err = std::abs(rule.w_minus + rule.w_plus - 6.0);
  const double wz_err = std::abs(rule.w_minus * rule.z_minus + rule.w_plus * rule.z_plus - 24.0);
  Mat outer = Mat::Zero(d, d);
  for (int k = 0; k < dirs.count(); ++k) outer += dirs.directions.col(k) * dirs.directions.col(k).transpose();
  const double theta_err = (outer - 9.0 * Mat::Identity(d, d)).cwiseAbs().maxCoeff();
  const double eps = 8 * std::numeric_limits<double>::epsilon();
  report(5, mean_err < 1e-10 && cov_err < 1e-10 && w_err <= 6 * eps && wz_err <= 24 * eps && theta_err < 1e-10,
         fmt("d=8: mean %.2g, cov %.2g (< 1e-10); |sum w - 6| %.2g, |sum wz - 24| %.2g; |sum tt' - 9I| %.2g", mean_err,
             cov_err, w_err, wz_err, theta_err));
}

// Upper quantile of chi-squared by Simpson integration of the density and bisection.
double chi2_quantile_oracle(int k, double p) {
  const double half = k / 2.0;
  const double lg = std::lgamma(half);
  auto pdf = [&](double x) {
    return x <= 0.0 ? 0.0 : std::exp((half - 1.0) * std::log(x) - x / 2.0 - half * std::log(2.0) - lg);
  };
  auto cdf = [&](double q) {
    const int n = 20000;
    const double hstep = q / n;
    double s = pdf(0.0) + pdf(q);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * hstep);
    return s * hstep / 3.0;
  };
  double lo = 0.0, hi = 10.0 * k + 100.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - cdf(mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void criterion_6() {
  const Scenario sc = baseline_spec().scenario;
  ConsistencyConfig cfg;
  Rng rng(6);
  const int draws = 10000;
  int rejected = 0;
  for (int n = 0; n < draws; ++n) {
    Vec truth(8);
    for (int i = 0; i < 8; ++i) truth[i] = uniform(rng, 0.0, 40.0);
    MeasurementFrame frame = expected_signal(truth, sc.grid, sc.measurement);
    for (int s = 0; s < frame.size(); ++s) frame[s] += std::sqrt(0.1) * std::normal_distribution<double>()(rng);
    if (!is_consistent(truth, frame, sc.grid, sc.measurement, cfg).consistent) ++rejected;
  }
  const double expect = draws * cfg.p_value;
  const double sd = std::sqrt(draws * cfg.p_value * (1.0 - cfg.p_value));
  const double q = chi2_threshold(25, cfg.p_value);
  const double oracle = chi2_quantile_oracle(25, cfg.p_value);
  const double rel = std::abs(q - oracle) / oracle;
  report(6, std::abs(rejected - expect) <= 3.0 * sd && rel < 1e-4,
         fmt("%d/%d rejections (expected %.1f +- %.1f); quantile %.6f vs oracle %.6f, rel %.2g (< 1e-4)", rejected,
             draws, expect, 3.0 * sd, q, oracle, rel));
}

void criterion_7() {
  Rng rng(7);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = 1 + trial % 6;
    Vec e(2 * c), t(2 * c);
    for (int i = 0; i < 2 * c; ++i) e[i] = uniform(rng, 0.0, 40.0), t[i] = uniform(rng, 0.0, 40.0);
    std::vector<int> perm(static_cast<std::size_t>(c));
    std::iota(perm.begin(), perm.end(), 0);
    auto cost = [&](const std::vector<int>& p) {
      double sum = 0.0;
      for (int i = 0; i < c; ++i)
        sum += (target_position(e, i) - target_position(t, p[static_cast<std::size_t>(i)])).norm();
      return sum / c;
    };
    double best = std::numeric_limits<double>::infinity();
    do best = std::min(best, cost(perm));
    while (std::next_permutation(perm.begin(), perm.end()));
    const OmatResult r = omat(e, t);
    const std::set<int> image(r.assignment.begin(), r.assignment.end());
    if (static_cast<int>(image.size()) != c || cost(r.assignment) != best || r.value != best) ++mismatches;
  }
  report(7, mismatches == 0, fmt("1000 instances, C = 1..6: %d differ from the brute-force minimum", mismatches));
}

void criterion_8() {
  Rng rng(8);
  double worst_trip = 0.0, worst_det = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 s(uniform(rng, 0.0, 40.0), uniform(rng, 0.0, 40.0));
    const double r = uniform(rng, 0.01, 10.0);
    const double th = uniform(rng, -M_PI + 1e-3, M_PI - 1e-3);
    const Vec2 x = s + r * Vec2(std::cos(th), std::sin(th));
    worst_trip = std::max(worst_trip, (inverse_polar(polar_transform(x, s), s) - x).norm());
    Mat2 j;
    for (int k = 0; k < 2; ++k) {
      Vec2 xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      j.col(k) = (polar_transform(xp, s) - polar_transform(xm, s)) / (2 * h);
    }
    worst_det = std::max(worst_det, std::abs(j.determinant() - 1.0));
  }
  report(8, worst_trip < 1e-12 && worst_det < 1e-6,
         fmt("1000 points: max round-trip error %.2g m (< 1e-12); max |det J - 1| by finite differences %.2g (< 1e-6)",
             worst_trip, worst_det));
}

void criterion_9() {
  ExperimentSpec s = baseline_spec();
  s.tracks = 5;
  if (tt_step_seconds == 0.0) {
    s.variants = {"tt_nonlinear"};
    tt_step_seconds = run_experiment(s, {s.base_point()}).summaries.front().mean_step_seconds;
  }
  s.variants = {"bpf"};
  s.bpf.particles = 500;
  const double bpf = run_experiment(s, {s.base_point()}).summaries.front().mean_step_seconds;
  report(9, tt_step_seconds < 10.0 * bpf,
         fmt("TT %.3g s/step vs 500-particle BPF %.3g s/step (ratio %.2f < 10)", tt_step_seconds, bpf,
             tt_step_seconds / bpf));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> want;
  for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
  auto on = [&](int id) { return want.empty() || want.count(id) > 0; };
  try {
    if (on(4)) criterion_4();
    if (on(5)) criterion_5();
    if (on(6)) criterion_6();
    if (on(7)) criterion_7();
    if (on(8)) criterion_8();
    if (on(1) || on(2)) criteria_1_2();
    if (on(3)) criterion_3();
    if (on(9)) criterion_9();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
