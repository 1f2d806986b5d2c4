#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "qwalk/analytic.hpp"
#include "qwalk/config.hpp"
#include "qwalk/experiments.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/parallel.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/table.hpp"

using namespace qwalk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

WalkSpec periodic(int n, double hw, double theta = 0.0, double phi = 0.0) {
  WalkSpec s;
  s.n_sites = n;
  s.theta_mean = theta;
  s.phi_mean = phi;
  s.theta_halfwidth = hw;
  s.phi_halfwidth = hw;
  return s;
}

constexpr std::uint64_t kSeed = 20240611;

Outcome criterion_1() {
  const WalkSpec spec = periodic(256, M_PI / 8);
  double worst = 0.0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    FloquetStepper stepper(sample_realization(spec, derive_seed(kSeed, r)), spec);
    WalkerState state = make_delocalized_state(spec, 20, 0.0);
    for (int t = 1; t <= 100; ++t) {
      stepper.step(state);
      worst = std::max(worst, std::abs(state.norm_squared() - 1.0));
    }
  }
  return {worst <= 1e-12, "max |norm - 1| = " + fmt("%.3e", worst) + " (limit 1e-12)"};
}

Outcome criterion_2() {
  double worst = 0.0, weakest_broken = INFINITY;
  WalkSpec spec = periodic(64, M_PI / 8, 0.3, 0.2);
  WalkSpec broken = spec;
  broken.chiral_constraint = false;
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto seed = derive_seed(kSeed, r);
    worst = std::max(worst, chiral_deviation(build_floquet_matrix(sample_realization(spec, seed), spec)));
    weakest_broken = std::min(
        weakest_broken, chiral_deviation(build_floquet_matrix(sample_realization(broken, seed), broken)));
  }
  return {worst <= 1e-12 && weakest_broken > 1e-3,
          "constrained max = " + fmt("%.3e", worst) + " (limit 1e-12), broken min = " +
              fmt("%.3e", weakest_broken) + " (need > 1e-3)"};
}

Outcome criterion_3() {
  const WalkSpec spec = periodic(64, M_PI / 8, 0.3, 0.2);
  double sl = 0.0, csl = 0.0;
  for (std::uint64_t r = 0; r < 5; ++r) {
    const auto rep = symmetry_report(build_floquet_matrix(sample_realization(spec, derive_seed(kSeed, r)), spec));
    sl = std::max(sl, rep.sublattice);
    csl = std::max(csl, rep.chiral_sublattice);
  }
  const WalkSpec small = periodic(32, M_PI / 8, 0.3, 0.2);
  const Eigen::MatrixXcd u = build_floquet_matrix(sample_realization(small, derive_seed(kSeed, 99)), small);
  const auto s2 = sigma2_operator(32);
  const auto c = chiral_sublattice_operator(32);
  double res = 0.0, res_half = 0.0;
  for (double eps : {0.05, 0.3, 1.0, 2.5}) {
    res = std::max(res, max_abs(s2 * resolvent(u, eps, PropagatorKind::kRetarded) * s2 -
                                resolvent(u, -eps, PropagatorKind::kAdvanced)));
    res_half = std::max(res_half, max_abs(c * resolvent(u, M_PI / 2 + eps, PropagatorKind::kRetarded) * c -
                                          resolvent(u, M_PI / 2 - eps, PropagatorKind::kAdvanced)));
  }
  const bool ok = sl <= 1e-12 && csl <= 1e-12 && res <= 1e-8 && res_half <= 1e-8;
  return {ok, "SUS+U " + fmt("%.2e", sl) + ", C_sl " + fmt("%.2e", csl) + ", resolvent(0) " +
                  fmt("%.2e", res) + ", resolvent(pi/2) " + fmt("%.2e", res_half)};
}

Outcome criterion_4() {
  const int n = 200;
  double worst = 0.0;
  for (auto [theta, phi] : {std::pair{0.0, 0.0}, std::pair{M_PI / 8, 0.0}, std::pair{M_PI / 4, 0.0},
                            std::pair{0.0, M_PI / 2}}) {
    const WalkSpec spec = periodic(n, 0.0, theta, phi);
    const auto phases = eigenphases(build_floquet_matrix(clean_realization(spec), spec));
    std::vector<double> expected;
    for (int m = 0; m < n; ++m) {
      const auto [a, b] = clean_dispersion(theta, phi, 2 * M_PI * m / n);
      expected.push_back(wrap_phase(a));
      expected.push_back(wrap_phase(b));
    }
    std::sort(expected.begin(), expected.end());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      worst = std::max(worst, std::abs(wrap_phase(phases[i] - expected[i])));
    }
  }
  return {worst <= 1e-10, "max eigenphase error = " + fmt("%.3e", worst) + " (limit 1e-10)"};
}

std::string peak_summary(const DosHistogram& h, double factor, bool& all) {
  const double median = h.median();
  std::string s;
  all = true;
  for (double e : {0.0, M_PI / 2, -M_PI / 2, M_PI}) {
    const double ratio = h.density[static_cast<std::size_t>(h.bin_of(e))] / median;
    all = all && ratio >= factor;
    s += (s.empty() ? "" : ", ") + fmt("%+.3f", e) + ": " + fmt("%.2f", ratio) + "x";
  }
  return s;
}

Outcome criterion_5() {
  const ExperimentConfig c = recipe_defaults("dos");
  const WalkSpec& spec = c.walk;
  std::vector<std::vector<double>> phases(static_cast<std::size_t>(c.ensemble.n_realizations));
  parallel_for_index(c.ensemble.n_realizations, std::max(1u, std::thread::hardware_concurrency()),
                     [&](std::int64_t i) {
                       const auto seed = derive_seed(c.ensemble.master_seed, static_cast<std::uint64_t>(i));
                       phases[static_cast<std::size_t>(i)] =
                           eigenphases(build_floquet_matrix(sample_realization(spec, seed), spec));
                     });
  bool ok = false, ok512 = false;
  const std::string main = peak_summary(histogram_from_phases(phases, c.dos_bins), c.check.peak_factor, ok);
  const std::string fine = peak_summary(histogram_from_phases(phases, 512), c.check.peak_factor, ok512);
  return {ok, std::to_string(c.dos_bins) + " bins: " + main + " of median (need >= " +
                  fmt("%g", c.check.peak_factor) + "x); diagnostic 512 bins: " + fine};
}

std::string first_failure(const ExperimentReport& r) {
  for (const auto& c : r.checks) {
    if (!c.passed) return c.name + ": " + c.detail;
  }
  std::string s;
  for (const auto& c : r.checks) s += (s.empty() ? "" : "; ") + c.name + ": " + c.detail;
  return s;
}

Outcome criterion_6() {
  const auto crit = run_polarization_experiment(recipe_defaults("fig4_critical"));
  const auto non = run_polarization_experiment(recipe_defaults("fig4_noncritical"));
  return {crit.report.passed() && non.report.passed(),
          "critical " + first_failure(crit.report) + " | noncritical " + first_failure(non.report)};
}

Outcome criterion_7() {
  const auto crit = run_polarization_experiment(recipe_defaults("fig5_critical"));
  const auto non = run_polarization_experiment(recipe_defaults("fig5_noncritical"));
  return {crit.report.passed() && non.report.passed(),
          "critical " + first_failure(crit.report) + " | noncritical " + first_failure(non.report)};
}

Outcome criterion_8() {
  using namespace analytic;
  double worst_norm = 0.0;
  for (double t : {10.0, 100.0, 1000.0}) {
    long double total = 0.0L;
    for (long q = 0;; ++q) {
      const double a = critical_distribution(t, q, Alignment::kAligned);
      const double b = critical_distribution(t, q, Alignment::kAntiAligned);
      total += (q == 0 ? 1.0L : 2.0L) * 2.0L * (a + b);
      if (a < 1e-30) break;
    }
    const double target = 1.0 / (4.0 * std::pow(std::log(t), 2));
    worst_norm = std::max(worst_norm, std::abs(static_cast<double>(total) / target - 1.0));
  }
  const double t = 1000.0, xi = xi_t(t);
  const long q1 = static_cast<long>(std::ceil(3 * xi)), q2 = static_cast<long>(std::floor(6 * xi));
  const double slope = (std::log(critical_distribution(t, q2, Alignment::kAligned)) -
                        std::log(critical_distribution(t, q1, Alignment::kAligned))) /
                       static_cast<double>(q2 - q1);
  const double slope_err = std::abs(slope * xi + 1.0);
  const double fa = scaling_function(1.0, Alignment::kAligned);
  const double fb = scaling_function(1.0, Alignment::kAntiAligned);
  const bool ok = worst_norm <= 1e-6 && slope_err <= 0.02 && std::abs(fa - 0.442254) <= 1e-6 &&
                  std::abs(fb - 0.295725) <= 1e-6;
  return {ok, "normalization rel err " + fmt("%.2e", worst_norm) + ", slope*xi_t = " +
                  fmt("%.4f", slope * xi) + ", F+(1) = " + fmt("%.7f", fa) + ", F-(1) = " + fmt("%.7f", fb)};
}

Outcome criterion_9() {
  const double eta = 1e-6;
  const double l = std::log(eta);
  const double target = 1.0 / (4.0 * eta * l * l);
  const double value = analytic::integrated_frequency_propagator(eta);
  const double rel = std::abs(value / target - 1.0);
  return {rel <= 0.05, "integral " + fmt("%.6g", value) + " vs 1/(4 eta ln^2 eta) = " + fmt("%.6g", target) +
                           " (rel " + fmt("%.2e", rel) + ", limit 0.05)"};
}

Outcome criterion_10() {
  using namespace analytic;
  bool half = true;
  for (double phi : {0.0, 0.4, M_PI / 2, -2.0}) {
    half = half && topological_angle(0.0, phi, M_PI / 8, M_PI / 8, 0.0) == std::complex<double>(0.5, 0.0);
  }
  const double chi0 = topological_angle(M_PI / 2, 0.0, M_PI / 8, M_PI / 8, 0.0).real();
  const double chipi = topological_angle(M_PI / 2, 0.0, M_PI / 8, M_PI / 8, M_PI).real();

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> th(M_PI / 2 - M_PI / 8, M_PI / 2 + M_PI / 8);
  std::uniform_real_distribution<double> ph(-M_PI / 8, M_PI / 8);
  const int draws = 10'000'000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = std::sin(th(gen)) * std::cos(ph(gen));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double sigma = std::sqrt((sum2 / draws - mean * mean) / draws);
  const double mc_chi0 = 0.5 * (1.0 - mean);
  const double z = std::abs(mc_chi0 - chi0) / (0.5 * sigma);
  const bool ok = half && std::abs(chi0 - 0.025180) <= 1e-6 && z <= 5.0 &&
                  std::abs(chi0 + chipi - 1.0) <= 1e-15 && classify_phase(chi0) == Phase::kTopological0;
  return {ok, "chi0 = " + fmt("%.8f", chi0) + ", Monte Carlo " + fmt("%.8f", mc_chi0) + " (" + fmt("%.2f", z) +
                  " sigma), chi0 + chi_pi - 1 = " + fmt("%.1e", chi0 + chipi - 1.0) +
                  (half ? ", chi0(0, phi) = 1/2" : ", chi0(0, phi) != 1/2")};
}

Outcome criterion_11() {
  const fs::path root = fs::temp_directory_path() / "qwalk_acceptance_11";
  fs::remove_all(root);
  auto run = [&](const std::string& name, std::vector<std::string> extra) {
    std::vector<std::string> o{"recipe=fig4_critical", "output.dir=" + (root / name).string()};
    o.insert(o.end(), extra.begin(), extra.end());
    return run_polarization_experiment(parse_config_text("", o));
  };
  run("w1", {"run.workers=1"});
  run("w4", {"run.workers=4"});
  const auto partial = run("resume", {"run.workers=2", "run.stop_after=173", "run.checkpoint_interval=50"});
  const bool stopped = partial.report.interrupted && fs::exists(root / "resume" / "checkpoint.txt");
  run("resume", {"run.workers=3"});
  bool same = true;
  std::string detail;
  for (const char* file : {"polarization.csv", "distribution.csv", "manifest.txt"}) {
    const std::string ref = read_file((root / "w1" / file).string());
    const bool a = read_file((root / "w4" / file).string()) == ref;
    const bool b = read_file((root / "resume" / file).string()) == ref;
    same = same && a && b;
    detail += std::string(detail.empty() ? "" : ", ") + file + (a && b ? " identical" : " DIFFERS");
  }
  fs::remove_all(root);
  return {same && stopped, detail + (stopped ? "; interrupted run left a checkpoint" : "; no checkpoint")};
}

Outcome criterion_12() {
  const auto r = run_sinai_experiment(recipe_defaults("sinai"));
  return {r.report.passed(), first_failure(r.report)};
}

struct Criterion {
  std::function<Outcome()> run;
  double limit_seconds;  // 0: no limit
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  bool include_long = false;
  app.add_option("--criterion", only, "run a single criterion (1-12)")->check(CLI::Range(1, 12));
  app.add_flag("--long", include_long, "include the long-running criterion 12");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {criterion_1, 10},  {criterion_2, 5},   {criterion_3, 10}, {criterion_4, 30},
      {criterion_5, 600}, {criterion_6, 300}, {criterion_7, 300}, {criterion_8, 1},
      {criterion_9, 1},   {criterion_10, 30}, {criterion_11, 900}, {criterion_12, 0}};

  bool all = true;
  for (int n = 1; n <= 12; ++n) {
    if (only != 0 && n != only) continue;
    if (n == 12 && !include_long) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[static_cast<std::size_t>(n - 1)].run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double limit = criteria[static_cast<std::size_t>(n - 1)].limit_seconds;
    const bool in_time = limit == 0 || seconds < limit;
    const bool passed = out.passed && in_time;
    all = all && passed;
    std::printf("criterion %d: %s %s [%.2f s%s]\n", n, passed ? "PASS" : "FAIL", out.detail.c_str(), seconds,
                limit > 0 ? (", limit " + fmt("%g", limit) + " s" + (in_time ? "" : " EXCEEDED")).c_str() : "");
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
