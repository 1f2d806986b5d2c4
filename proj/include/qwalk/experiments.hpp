#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/config.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/table.hpp"

namespace qwalk {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  std::string recipe;
  std::vector<CheckResult> checks;
  std::vector<std::string> files;
  // The run stopped early (run.stop_after); a checkpoint holds the progress.
  bool interrupted = false;

  bool passed() const;
};

std::string code_version();

// Header block shared by every output file: hash, seed, realization count,
// code version and the hashed config entries.
Metadata output_metadata(const ExperimentConfig& config, std::int64_t n_realizations);

// ---- Checkpoints ----------------------------------------------------------

struct Checkpoint {
  std::string config_hash;
  DistributionAccumulator accumulator;
};

// Exact text form (hex floats), written atomically.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

// ---- Recipes --------------------------------------------------------------

struct PolarizationResult {
  DistributionRecord record;
  PolarizationSeries series;
  StaggeringMetric staggering;
  // Critical counterpart of a non-critical recipe (same settings, theta_mean = 0).
  std::optional<PolarizationSeries> reference;
  ExperimentReport report;
};

// fig4_* / fig5_* recipes. Writes polarization.csv, distribution.csv and the
// manifest when output_dir is set.
PolarizationResult run_polarization_experiment(const ExperimentConfig& config);

struct DosPeak {
  double energy = 0.0;
  double density = 0.0;
  double ratio = 0.0;  // density / median bin
};

struct DosResult {
  DosHistogram histogram;
  double median = 0.0;
  std::vector<DosPeak> peaks;  // at 0, pi/2, -pi/2, pi
  ExperimentReport report;
};

DosResult run_dos_experiment(const ExperimentConfig& config);

struct SinaiResult {
  std::vector<int> times;
  std::vector<double> mean_abs_q;
  std::vector<double> log2_t;  // ln^2 t, 0 at t = 0
  std::vector<double> clean_mean_abs_q;
  double pearson_log2 = 0.0;        // over times t >= 2
  double clean_pearson_t = 0.0;
  double clean_pearson_log2 = 0.0;
  ExperimentReport report;
};

SinaiResult run_sinai_experiment(const ExperimentConfig& config);

struct ComparisonResult {
  std::vector<int> times;
  std::vector<double> simulated;      // integrated Delta P(t)
  std::vector<int> predicted_sign;    // +1, or (-1)^t for staggered input
  std::vector<double> site_agreement; // fraction of resolved sites with the predicted sign
  double agreement_fraction = 0.0;    // over the check window
  ExperimentReport report;
};

// Reads a finished polarization run from config.compare_input.
ComparisonResult run_comparison(const ExperimentConfig& config);

// Clean-lattice spectrum against the closed-form bands; writes spectrum.csv.
ExperimentReport run_dispersion(const ExperimentConfig& config);

ExperimentReport run_symmetry_check(const ExperimentConfig& config);

ExperimentReport run_phase(const ExperimentConfig& config);

// Writes analytic.csv for config.analytic.
ExperimentReport run_analytic_tables(const ExperimentConfig& config);

// Dispatches on config.recipe.
ExperimentReport run_recipe(const ExperimentConfig& config);

}  // namespace qwalk
