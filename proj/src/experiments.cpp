#include "qwalk/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <climits>
#include <filesystem>
#include <map>
#include <sstream>

#include "qwalk/analytic.hpp"
#include "qwalk/errors.hpp"

namespace qwalk {

namespace fs = std::filesystem;

bool ExperimentReport::passed() const {
  if (interrupted) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string code_version() { return QWALK_BUILD_ID; }

Metadata output_metadata(const ExperimentConfig& config, std::int64_t n_realizations) {
  Metadata m;
  m.emplace_back("config_hash", config_hash(config));
  m.emplace_back("master_seed", std::to_string(config.ensemble.master_seed));
  m.emplace_back("n_realizations", std::to_string(n_realizations));
  m.emplace_back("code_version", code_version());
  for (const auto& [key, value] : hashed_entries(config)) m.emplace_back("config." + key, value);
  return m;
}

namespace {

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

std::string in_dir(const ExperimentConfig& config, const std::string& name) {
  return (fs::path(config.output_dir) / name).string();
}

void write_manifest(const ExperimentConfig& config, const ExperimentReport& report,
                    std::int64_t n_realizations) {
  if (config.output_dir.empty()) return;
  std::string text;
  text += "recipe: " + config.recipe + "\n";
  text += "config_hash: " + config_hash(config) + "\n";
  text += "master_seed: " + std::to_string(config.ensemble.master_seed) + "\n";
  text += "n_realizations: " + std::to_string(n_realizations) + "\n";
  text += "code_version: " + code_version() + "\n";
  text += std::string("status: ") +
          (report.interrupted ? "interrupted" : report.passed() ? "pass" : "fail") + "\n";
  for (const auto& c : report.checks) {
    text += "check." + c.name + ": " + (c.passed ? "PASS" : "FAIL") + " " + c.detail + "\n";
  }
  for (const auto& f : report.files) text += "file: " + f + "\n";
  write_file_atomic(in_dir(config, "manifest.txt"), text);
}

// Accumulates the distribution ensemble with optional checkpoint/resume.
// `budget` is the remaining run.stop_after allowance (-1: unlimited).
DistributionAccumulator accumulate_with_checkpoint(const ExperimentConfig& config,
                                                   const WalkSpec& spec,
                                                   const std::vector<int>& times,
                                                   const std::string& checkpoint_name,
                                                   const std::string& hash,
                                                   std::int64_t& budget, bool& interrupted) {
  const std::string path = config.output_dir.empty() ? "" : in_dir(config, checkpoint_name);
  std::optional<DistributionAccumulator> resume;
  if (!path.empty() && fs::exists(path)) {
    Checkpoint cp = load_checkpoint(path);
    if (cp.config_hash != hash) {
      throw ConfigError("output.dir", "checkpoint '" + path + "' belongs to config " +
                                          cp.config_hash + ", not " + hash);
    }
    resume = std::move(cp.accumulator);
  }

  AccumulateOptions options;
  options.workers = config.workers;
  options.resume = resume ? &*resume : nullptr;
  options.stop_after = budget;
  if (!path.empty()) {
    options.checkpoint_interval = config.checkpoint_interval;
    options.on_checkpoint = [&](const DistributionAccumulator& acc) {
      save_checkpoint(path, {hash, acc});
    };
  }
  const std::int64_t before = resume ? resume->count() : 0;
  DistributionAccumulator acc =
      accumulate_samples(config.ensemble, spec, config.initial, times, options);
  if (budget >= 0) budget -= acc.count() - before;

  if (acc.count() < config.ensemble.n_realizations) {
    interrupted = true;
    if (!path.empty()) save_checkpoint(path, {hash, acc});
  } else if (!path.empty()) {
    std::error_code ec;
    fs::remove(path, ec);
  }
  return acc;
}

std::vector<Row> polarization_rows(const PolarizationSeries& series) {
  std::vector<Row> rows;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const int t = series.times[i];
    const double s = (t % 2 == 0 ? 1.0 : -1.0) * series.dP[i];
    const std::int64_t sign = s > 0.0 ? 1 : (s < 0.0 ? -1 : 0);
    rows.push_back({std::int64_t{t}, series.dP[i], series.std_error[i], sign});
  }
  return rows;
}

std::vector<Row> distribution_rows(const DistributionRecord& record) {
  std::vector<Row> rows;
  rows.reserve(record.times.size() * static_cast<std::size_t>(record.n_sites()) * 2);
  for (std::size_t ti = 0; ti < record.times.size(); ++ti) {
    for (int site = 0; site < record.n_sites(); ++site) {
      for (int sigma : {kSigmaRight, kSigmaLeft}) {
        rows.push_back({std::int64_t{record.times[ti]}, std::int64_t{record.relative_q(site)},
                        std::int64_t{sigma == kSigmaRight ? 1 : -1}, record.P(ti, site, sigma),
                        record.P_error(ti, site, sigma)});
      }
    }
  }
  return rows;
}

double window_mean_abs(const PolarizationSeries& s, int start, int end) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (s.times[i] >= start && s.times[i] <= end) {
      sum += std::abs(s.dP[i]);
      ++n;
    }
  }
  return n > 0 ? sum / n : 0.0;
}

CheckResult positivity_check(const std::string& name, const std::vector<int>& times,
                             const std::vector<double>& values, int start, int end) {
  int n = 0, bad = 0;
  double lowest = INFINITY;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < start || times[i] > end) continue;
    ++n;
    lowest = std::min(lowest, values[i]);
    if (!(values[i] > 0.0)) ++bad;
  }
  CheckResult c{name, n > 0 && bad == 0, ""};
  c.detail = "t in [" + std::to_string(start) + "," + std::to_string(end) + "]: " +
             std::to_string(n - bad) + "/" + std::to_string(n) + " positive, min " +
             fmt("%.6g", n > 0 ? lowest : 0.0);
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const auto& acc = checkpoint.accumulator;
  std::string text = "qwalk-checkpoint 1\n";
  text += "config_hash: " + checkpoint.config_hash + "\n";
  text += "count: " + std::to_string(acc.count()) + "\n";
  text += "cells: " + std::to_string(acc.cells()) + "\n";
  char buf[96];
  for (std::size_t k = 0; k < acc.cells(); ++k) {
    std::snprintf(buf, sizeof buf, "%a %a\n", acc.mean()[k], acc.m2()[k]);
    text += buf;
  }
  write_file_atomic(path, text);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string magic, line;
  std::getline(in, magic);
  if (magic != "qwalk-checkpoint 1") throw Error("'" + path + "' is not a checkpoint file");
  auto field = [&](const std::string& key) {
    std::getline(in, line);
    if (line.rfind(key + ": ", 0) != 0) throw Error("checkpoint '" + path + "': missing " + key);
    return line.substr(key.size() + 2);
  };
  Checkpoint cp;
  cp.config_hash = field("config_hash");
  const std::int64_t count = std::strtoll(field("count").c_str(), nullptr, 10);
  const std::size_t cells = std::strtoull(field("cells").c_str(), nullptr, 10);
  std::vector<double> mean(cells), m2(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    std::string a, b;
    if (!(in >> a >> b)) throw Error("checkpoint '" + path + "' is truncated");
    mean[k] = std::strtod(a.c_str(), nullptr);
    m2[k] = std::strtod(b.c_str(), nullptr);
  }
  cp.accumulator = DistributionAccumulator::restore(count, std::move(mean), std::move(m2));
  return cp;
}

PolarizationResult run_polarization_experiment(const ExperimentConfig& config) {
  if (!config.recipe.starts_with("fig")) {
    throw PreconditionError("recipe '" + config.recipe + "' is not a polarization recipe");
  }
  PolarizationResult result;
  ExperimentReport& report = result.report;
  report.recipe = config.recipe;
  const std::vector<int> times = config.observation_times();
  const std::string hash = config_hash(config);
  std::int64_t budget = config.stop_after;
  bool interrupted = false;

  const DistributionAccumulator acc = accumulate_with_checkpoint(
      config, config.walk, times, "checkpoint.txt", hash, budget, interrupted);

  const bool noncritical = config.recipe.ends_with("_noncritical");
  const bool needs_reference = config.recipe == "fig4_noncritical";
  ExperimentConfig reference_config = config;
  reference_config.walk.theta_mean = 0.0;
  reference_config.walk.phi_mean = 0.0;
  std::optional<DistributionAccumulator> reference_acc;
  if (needs_reference && !interrupted) {
    reference_acc = accumulate_with_checkpoint(reference_config, reference_config.walk, times,
                                               "checkpoint_reference.txt",
                                               config_hash(reference_config), budget, interrupted);
  }
  if (interrupted) {
    report.interrupted = true;
    write_manifest(config, report, acc.count());
    return result;
  }

  result.record = make_record(acc, config.ensemble, config.walk, config.initial, times);
  result.series = polarization_series(result.record);
  result.staggering =
      staggering_metric(result.series, config.check.window_start, config.check.window_end);
  if (reference_acc) {
    result.reference = polarization_series(make_record(*reference_acc, config.ensemble,
                                                       reference_config.walk, config.initial,
                                                       times));
  }

  const int ws = config.check.window_start, we = config.check.window_end;
  if (!noncritical) {
    if (result.series.staggered) {
      report.checks.push_back(
          positivity_check("staggered_sign", result.series.times, result.staggering.s, ws, we));
    } else {
      report.checks.push_back(
          positivity_check("positive_polarization", result.series.times, result.series.dP, ws, we));
    }
  } else if (result.series.staggered) {
    const double frac = result.staggering.positive_fraction;
    CheckResult c{"sign_fraction", std::abs(frac - 0.5) <= config.check.sign_fraction_tolerance, ""};
    c.detail = "positive fraction of (-1)^t dP over [" + std::to_string(ws) + "," +
               std::to_string(we) + "] = " + fmt("%.4f", frac) + ", |f - 1/2| <= " +
               fmt("%g", config.check.sign_fraction_tolerance);
    report.checks.push_back(c);
  } else {
    const int cs = config.check.contrast_start;
    const double mine = window_mean_abs(result.series, cs, we);
    const double critical = window_mean_abs(*result.reference, cs, we);
    CheckResult c{"contrast", mine * config.check.contrast_factor <= critical, ""};
    c.detail = "mean|dP| over [" + std::to_string(cs) + "," + std::to_string(we) +
               "] = " + fmt("%.6g", mine) + " vs critical " + fmt("%.6g", critical) +
               " (ratio " + fmt("%.4f", critical > 0 ? mine / critical : INFINITY) + ", limit 1/" +
               fmt("%g", config.check.contrast_factor) + ")";
    report.checks.push_back(c);
  }

  if (!config.output_dir.empty()) {
    Metadata meta = output_metadata(config, acc.count());
    Metadata pmeta = meta;
    pmeta.emplace_back("staggered", result.series.staggered ? "true" : "false");
    write_table(polarization_rows(result.series), schema::polarization(),
                in_dir(config, "polarization.csv"), pmeta);
    report.files.push_back("polarization.csv");
    write_table(distribution_rows(result.record), schema::distribution(),
                in_dir(config, "distribution.csv"), meta);
    report.files.push_back("distribution.csv");
    if (result.reference) {
      Metadata rmeta = output_metadata(reference_config, reference_acc->count());
      rmeta.emplace_back("staggered", result.reference->staggered ? "true" : "false");
      write_table(polarization_rows(*result.reference), schema::polarization(),
                  in_dir(config, "polarization_reference.csv"), rmeta);
      report.files.push_back("polarization_reference.csv");
    }
  }
  write_manifest(config, report, acc.count());
  return result;
}

DosResult run_dos_experiment(const ExperimentConfig& config) {
  DosResult result;
  result.report.recipe = config.recipe;
  EnsemblePlan plan = config.ensemble;
  result.histogram = dos_histogram(config.walk, config.dos_bins, plan, config.workers);
  result.median = result.histogram.median();

  bool all = true;
  std::string detail;
  for (double e : {0.0, M_PI / 2, -M_PI / 2, M_PI}) {
    DosPeak p;
    p.energy = e;
    p.density = result.histogram.density[static_cast<std::size_t>(result.histogram.bin_of(e))];
    p.ratio = result.median > 0.0 ? p.density / result.median : INFINITY;
    all = all && p.ratio >= config.check.peak_factor;
    detail += (detail.empty() ? "" : ", ") + std::string("eps=") + fmt("%+.4f", e) + ": " +
              fmt("%.3f", p.ratio) + "x";
    result.peaks.push_back(p);
  }
  result.report.checks.push_back(
      {"peaks", all, detail + " of median (need >= " + fmt("%g", config.check.peak_factor) + "x)"});

  if (!config.output_dir.empty()) {
    std::vector<Row> rows;
    for (std::size_t k = 0; k < result.histogram.centers.size(); ++k) {
      rows.push_back({result.histogram.centers[k], result.histogram.density[k],
                      result.histogram.std_error[k]});
    }
    Metadata meta = output_metadata(config, result.histogram.n_realizations);
    meta.emplace_back("median_density", format_double(result.median));
    for (const auto& p : result.peaks) {
      meta.emplace_back("peak_ratio_at_" + fmt("%.6f", p.energy), format_double(p.ratio));
    }
    write_table(rows, schema::dos(), in_dir(config, "dos.csv"), meta);
    result.report.files.push_back("dos.csv");
  }
  write_manifest(config, result.report, result.histogram.n_realizations);
  return result;
}

SinaiResult run_sinai_experiment(const ExperimentConfig& config) {
  SinaiResult result;
  ExperimentReport& report = result.report;
  report.recipe = config.recipe;
  const std::vector<int> times = config.observation_times();
  std::int64_t budget = config.stop_after;
  bool interrupted = false;
  const auto acc = accumulate_with_checkpoint(config, config.walk, times, "checkpoint.txt",
                                              config_hash(config), budget, interrupted);
  if (interrupted) {
    report.interrupted = true;
    write_manifest(config, report, acc.count());
    return result;
  }
  const auto record = make_record(acc, config.ensemble, config.walk, config.initial, times);
  result.times = times;
  result.mean_abs_q = mean_displacement(record);

  WalkSpec clean = config.walk;
  clean.theta_halfwidth = 0.0;
  clean.phi_halfwidth = 0.0;
  EnsemblePlan single{config.ensemble.master_seed, 1, 0};
  result.clean_mean_abs_q = mean_displacement(
      accumulate_distribution(single, clean, config.initial, times));

  std::vector<double> fit_t, fit_l2, fit_q, fit_clean;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double l = times[i] > 0 ? std::log(static_cast<double>(times[i])) : 0.0;
    result.log2_t.push_back(l * l);
    if (times[i] >= 2) {
      fit_t.push_back(times[i]);
      fit_l2.push_back(l * l);
      fit_q.push_back(result.mean_abs_q[i]);
      fit_clean.push_back(result.clean_mean_abs_q[i]);
    }
  }
  if (fit_t.size() >= 2) {
    result.pearson_log2 = pearson_correlation(fit_q, fit_l2);
    result.clean_pearson_t = pearson_correlation(fit_clean, fit_t);
    result.clean_pearson_log2 = pearson_correlation(fit_clean, fit_l2);
  }
  report.checks.push_back({"log_squared_scaling", result.pearson_log2 >= config.check.pearson_min,
                           "Pearson(<|q|>, ln^2 t) = " + fmt("%.4f", result.pearson_log2) +
                               " over " + std::to_string(fit_t.size()) + " times (need >= " +
                               fmt("%g", config.check.pearson_min) + ")"});
  report.checks.push_back({"clean_control_ballistic",
                           result.clean_pearson_t > result.clean_pearson_log2,
                           "clean walk: Pearson with t = " + fmt("%.4f", result.clean_pearson_t) +
                               ", with ln^2 t = " + fmt("%.4f", result.clean_pearson_log2)});

  if (!config.output_dir.empty()) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < times.size(); ++i) {
      rows.push_back({std::int64_t{times[i]}, result.mean_abs_q[i], result.log2_t[i],
                      result.clean_mean_abs_q[i]});
    }
    const TableSchema sinai{"sinai", {"t", "mean_abs_q", "log2_t", "clean_mean_abs_q"}};
    Metadata meta = output_metadata(config, acc.count());
    meta.emplace_back("pearson_log2", format_double(result.pearson_log2));
    write_table(rows, sinai, in_dir(config, "sinai.csv"), meta);
    report.files.push_back("sinai.csv");
  }
  write_manifest(config, report, acc.count());
  return result;
}

ComparisonResult run_comparison(const ExperimentConfig& config) {
  if (config.compare_input.empty()) {
    throw ConfigError("compare.input", "directory of a finished polarization run is required");
  }
  const fs::path dir(config.compare_input);
  for (const char* name : {"polarization.csv", "distribution.csv"}) {
    if (!fs::exists(dir / name)) {
      throw ConfigError("compare.input", "missing " + (dir / name).string());
    }
  }
  const TableData pol = read_table((dir / "polarization.csv").string());
  const TableData dist = read_table((dir / "distribution.csv").string());
  const bool staggered = pol.meta("staggered") == "true";

  ComparisonResult result;
  result.report.recipe = config.recipe;
  const int ct = pol.column("t"), cdp = pol.column("dP");
  if (ct < 0 || cdp < 0) throw ConfigError("compare.input", "polarization.csv lacks t/dP columns");
  for (const auto& row : pol.rows) {
    const int t = std::stoi(row[static_cast<std::size_t>(ct)]);
    result.times.push_back(t);
    result.simulated.push_back(std::strtod(row[static_cast<std::size_t>(cdp)].c_str(), nullptr));
    result.predicted_sign.push_back(staggered && t % 2 != 0 ? -1 : 1);
  }

  // Delta P(t, q) per site from the distribution table.
  std::map<std::pair<int, int>, double> profile;
  const int dt = dist.column("t"), dq = dist.column("q"), ds = dist.column("sigma_out"),
            dpp = dist.column("P");
  for (const auto& row : dist.rows) {
    const int t = std::stoi(row[static_cast<std::size_t>(dt)]);
    const int q = std::stoi(row[static_cast<std::size_t>(dq)]);
    const int s = std::stoi(row[static_cast<std::size_t>(ds)]);
    profile[{t, q}] += s * std::strtod(row[static_cast<std::size_t>(dpp)].c_str(), nullptr);
  }

  std::vector<Row> overlay;
  int n_window = 0, n_agree = 0;
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    const int t = result.times[i];
    const int predicted = result.predicted_sign[i];
    double peak = 0.0;
    for (auto it = profile.lower_bound({t, INT32_MIN}); it != profile.end() && it->first.first == t; ++it) {
      peak = std::max(peak, std::abs(it->second));
    }
    int resolved = 0, agree = 0;
    for (auto it = profile.lower_bound({t, INT32_MIN}); it != profile.end() && it->first.first == t; ++it) {
      const double v = it->second;
      if (std::abs(v) > 1e-3 * peak && peak > 0.0) {
        ++resolved;
        if (v * predicted > 0.0) ++agree;
      }
      if (t >= 2) {
        overlay.push_back({std::int64_t{t}, std::int64_t{it->first.second}, v,
                           predicted * analytic::critical_polarization(t, it->first.second)});
      }
    }
    result.site_agreement.push_back(resolved > 0 ? static_cast<double>(agree) / resolved : 0.0);
    if (t >= config.check.window_start && t <= config.check.window_end) {
      ++n_window;
      if (result.simulated[i] * predicted > 0.0) ++n_agree;
    }
  }
  result.agreement_fraction = n_window > 0 ? static_cast<double>(n_agree) / n_window : 0.0;
  result.report.checks.push_back(
      {"sign_agreement", n_window > 0 && n_agree == n_window,
       std::string(staggered ? "(-1)^t" : "positive") + " sign predicted; " +
           std::to_string(n_agree) + "/" + std::to_string(n_window) + " times agree over [" +
           std::to_string(config.check.window_start) + "," +
           std::to_string(config.check.window_end) + "]"});

  if (!config.output_dir.empty()) {
    const TableSchema overlay_schema{"comparison", {"t", "q", "simulated_dP", "analytic_dP"}};
    Metadata meta = output_metadata(config, 0);
    meta.emplace_back("input_config_hash", pol.meta("config_hash"));
    meta.emplace_back("analytic_normalization",
                      "sum over q and four channels of P = 1/(4 ln^2 t), origin at half spacing");
    write_table(overlay, overlay_schema, in_dir(config, "comparison.csv"), meta);
    result.report.files.push_back("comparison.csv");
    std::vector<Row> rows;
    const TableSchema agreement{"agreement", {"t", "dP", "predicted_sign", "site_agreement"}};
    for (std::size_t i = 0; i < result.times.size(); ++i) {
      rows.push_back({std::int64_t{result.times[i]}, result.simulated[i],
                      std::int64_t{result.predicted_sign[i]}, result.site_agreement[i]});
    }
    write_table(rows, agreement, in_dir(config, "agreement.csv"), meta);
    result.report.files.push_back("agreement.csv");
  }
  write_manifest(config, result.report, 0);
  return result;
}

ExperimentReport run_dispersion(const ExperimentConfig& config) {
  ExperimentReport report;
  report.recipe = config.recipe;
  const WalkSpec& spec = config.walk;
  if (spec.boundary != Boundary::kPeriodic) {
    throw ConfigError("walk.boundary", "dispersion needs a periodic lattice");
  }
  const AngleField field = clean_realization(spec);
  const auto phases = eigenphases(build_floquet_matrix(field, spec));
  std::vector<double> expected;
  const int n = spec.n_sites;
  for (int m = 0; m < n; ++m) {
    const auto [plus, minus] = clean_dispersion(spec.theta_mean, spec.phi_mean, 2.0 * M_PI * m / n);
    expected.push_back(wrap_phase(plus));
    expected.push_back(wrap_phase(minus));
  }
  std::sort(expected.begin(), expected.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    worst = std::max(worst, std::abs(wrap_phase(phases[i] - expected[i])));
  }
  report.checks.push_back({"band_match", worst <= 1e-10,
                           "max |eigenphase - band| = " + fmt("%.3g", worst) + " (limit 1e-10)"});
  if (!config.output_dir.empty()) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < phases.size(); ++i) {
      rows.push_back({static_cast<std::int64_t>(i), phases[i]});
    }
    write_table(rows, schema::spectrum(), in_dir(config, "spectrum.csv"),
                output_metadata(config, 0));
    report.files.push_back("spectrum.csv");
  }
  write_manifest(config, report, 0);
  return report;
}

ExperimentReport run_symmetry_check(const ExperimentConfig& config) {
  ExperimentReport report;
  report.recipe = config.recipe;
  const WalkSpec& spec = config.walk;
  if (spec.boundary != Boundary::kPeriodic) {
    throw ConfigError("walk.boundary", "symmetry checks need a periodic lattice");
  }
  if (spec.n_sites % 2 != 0) {
    throw ConfigError("walk.n_sites", "symmetry checks need an even number of sites");
  }
  const AngleField field =
      sample_realization(spec, derive_seed(config.ensemble.master_seed, 0));
  const Eigen::MatrixXcd u = build_floquet_matrix(field, spec);
  const SymmetryReport sym = symmetry_report(u);

  if (spec.chiral_constraint) {
    report.checks.push_back({"chiral", sym.chiral <= 1e-12,
                             "|s2 U s2 - U^+| = " + fmt("%.3g", sym.chiral) + " (limit 1e-12)"});
  } else {
    report.checks.push_back({"chiral_broken", sym.chiral > 1e-3,
                             "|s2 U s2 - U^+| = " + fmt("%.3g", sym.chiral) +
                                 " (constraint off, expect > 1e-3)"});
  }
  report.checks.push_back({"sublattice", sym.sublattice <= 1e-12,
                           "|S U S + U| = " + fmt("%.3g", sym.sublattice) + " (limit 1e-12)"});
  if (spec.chiral_constraint) {
    report.checks.push_back({"chiral_sublattice", sym.chiral_sublattice <= 1e-12,
                             "|C (iU) C - (iU)^+| = " + fmt("%.3g", sym.chiral_sublattice) +
                                 " (limit 1e-12)"});
    const auto s2 = sigma2_operator(spec.n_sites);
    const auto csl = chiral_sublattice_operator(spec.n_sites);
    const double eps = 0.3;
    const double d11 = max_abs(s2 * resolvent(u, eps, PropagatorKind::kRetarded) * s2 -
                               resolvent(u, -eps, PropagatorKind::kAdvanced));
    const double d23 =
        max_abs(csl * resolvent(u, M_PI / 2 + eps, PropagatorKind::kRetarded) * csl -
                resolvent(u, M_PI / 2 - eps, PropagatorKind::kAdvanced));
    report.checks.push_back({"resolvent_chiral", d11 <= 1e-8,
                             "|s2 G^R(e) s2 - G^A(-e)| = " + fmt("%.3g", d11) + " (limit 1e-8)"});
    report.checks.push_back({"resolvent_chiral_sublattice", d23 <= 1e-8,
                             "|C G^R(pi/2+e) C - G^A(pi/2-e)| = " + fmt("%.3g", d23) +
                                 " (limit 1e-8)"});
  }
  write_manifest(config, report, 1);
  return report;
}

ExperimentReport run_phase(const ExperimentConfig& config) {
  ExperimentReport report;
  report.recipe = config.recipe;
  const WalkSpec& w = config.walk;
  const auto chi0 =
      analytic::topological_angle(w.theta_mean, w.phi_mean, w.theta_halfwidth, w.phi_halfwidth, 0.0);
  const auto chipi =
      analytic::topological_angle(w.theta_mean, w.phi_mean, w.theta_halfwidth, w.phi_halfwidth, M_PI);
  const auto phase = analytic::classify_phase(chi0.real());
  report.checks.push_back({"phase", true,
                           "chi0 = " + fmt("%.9f", chi0.real()) + ", chi_pi = " +
                               fmt("%.9f", chipi.real()) + ", phase = " +
                               std::string(analytic::to_string(phase))});
  const double sum = chi0.real() + chipi.real();
  report.checks.push_back({"complementary", std::abs(sum - 1.0) <= 1e-12,
                           "chi0 + chi_pi = " + fmt("%.17g", sum)});
  write_manifest(config, report, 0);
  return report;
}

ExperimentReport run_analytic_tables(const ExperimentConfig& config) {
  ExperimentReport report;
  report.recipe = config.recipe;
  const auto& a = config.analytic;
  std::vector<Row> rows;
  const int qmax = a.q_max;
  if (a.domain == "time") {
    for (double t : a.t_values) {
      for (auto al : {analytic::Alignment::kAligned, analytic::Alignment::kAntiAligned}) {
        for (int q = -qmax; q <= qmax; ++q) {
          rows.push_back({t, std::int64_t{q}, std::int64_t{analytic::sign(al)},
                          analytic::critical_distribution(t, q, al)});
        }
      }
      // Normalization over a range wide enough for the tail to vanish.
      const double xi = analytic::xi_t(t);
      const long reach = static_cast<long>(60.0 * xi) + 10;
      double total = 0.0;
      for (long q = -reach; q <= reach; ++q) {
        total += 2.0 * (analytic::critical_distribution(t, q, analytic::Alignment::kAligned) +
                        analytic::critical_distribution(t, q, analytic::Alignment::kAntiAligned));
      }
      const double l = std::log(t);
      const double target = 1.0 / (4.0 * l * l);
      const double rel = std::abs(total / target - 1.0);
      report.checks.push_back({"normalization_t=" + fmt("%g", t), rel <= 1e-6,
                               "sum = " + fmt("%.10g", total) + ", 1/(4 ln^2 t) = " +
                                   fmt("%.10g", target) + ", rel " + fmt("%.2g", rel)});
    }
  } else {
    for (double eta : a.eta_values) {
      for (auto al : {analytic::Alignment::kAligned, analytic::Alignment::kAntiAligned}) {
        for (int q = 0; q <= qmax; ++q) {
          rows.push_back({eta, std::int64_t{q}, std::int64_t{analytic::sign(al)},
                          analytic::frequency_propagator(eta, q, al)});
        }
      }
      const double total = analytic::integrated_frequency_propagator(eta);
      const double l = std::log(eta);
      const double target = 1.0 / (4.0 * eta * l * l);
      const double rel = std::abs(total / target - 1.0);
      report.checks.push_back({"integrated_eta=" + fmt("%g", eta), rel <= 0.05,
                               "integral = " + fmt("%.8g", total) + ", 1/(4 eta ln^2 eta) = " +
                                   fmt("%.8g", target) + ", rel " + fmt("%.2g", rel)});
    }
  }
  if (!config.output_dir.empty()) {
    Metadata meta = output_metadata(config, 0);
    meta.emplace_back("domain", a.domain);
    meta.emplace_back("normalization",
                      a.domain == "time"
                          ? "C(t): sum over q in Z and four channels = 1/(4 ln^2 t); q = 0 at half spacing"
                          : "full matrix elements");
    write_table(rows, schema::analytic(), in_dir(config, "analytic.csv"), meta);
    report.files.push_back("analytic.csv");
  }
  write_manifest(config, report, 0);
  return report;
}

ExperimentReport run_recipe(const ExperimentConfig& config) {
  const std::string& r = config.recipe;
  if (r.starts_with("fig")) return run_polarization_experiment(config).report;
  if (r == "dos") return run_dos_experiment(config).report;
  if (r == "sinai") return run_sinai_experiment(config).report;
  if (r == "compare") return run_comparison(config).report;
  if (r == "dispersion") return run_dispersion(config);
  if (r == "symmetries") return run_symmetry_check(config);
  if (r == "phase") return run_phase(config);
  if (r == "analytic") return run_analytic_tables(config);
  throw ConfigError("recipe", "unknown recipe '" + r + "'");
}

}  // namespace qwalk
