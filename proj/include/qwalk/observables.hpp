#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qwalk/disorder.hpp"
#include "qwalk/lattice.hpp"
#include "qwalk/walk_spec.hpp"

namespace qwalk {

// Site-resolved probabilities of finding the walker in |q, right> / |q, left>.
struct SpinProbabilities {
  std::vector<double> right;
  std::vector<double> left;
};

SpinProbabilities spin_resolved_probability(const WalkerState& state);

struct InitialStateRecipe {
  enum class Kind { kLocalized, kDelocalized };
  Kind kind = Kind::kDelocalized;
  int M = 100;                 // delocalized: occupies M+1 even sites
  double p0 = 0.0;             // delocalized: phase step exp(2 i k p0)
  int q0_offset = 0;           // localized: site relative to the lattice center
  Chirality chirality = Chirality::kRight;  // localized only; delocalized is |right>

  bool operator==(const InitialStateRecipe&) const = default;
};

// Site index of the initial state's center; relative coordinates use it as 0.
int initial_origin(const WalkSpec& spec, const InitialStateRecipe& recipe);

WalkerState prepare_initial_state(const WalkSpec& spec, const InitialStateRecipe& recipe,
                                  int planned_steps);

inline constexpr int kSigmaRight = 0;
inline constexpr int kSigmaLeft = 1;

// Ensemble mean of P(t, q, sigma_out) with per-cell standard errors.
// Cells are laid out [time index][site][sigma_out].
struct DistributionRecord {
  WalkSpec spec;
  InitialStateRecipe initial;
  std::vector<int> times;
  int origin = 0;
  std::int64_t n_realizations = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> mean;
  std::vector<double> std_error;

  int n_sites() const { return spec.n_sites; }
  std::size_t cell(std::size_t time_index, int site, int sigma) const {
    return (time_index * static_cast<std::size_t>(spec.n_sites) +
            static_cast<std::size_t>(site)) * 2 + static_cast<std::size_t>(sigma);
  }
  double P(std::size_t time_index, int site, int sigma) const {
    return mean[cell(time_index, site, sigma)];
  }
  double P_error(std::size_t time_index, int site, int sigma) const {
    return std_error[cell(time_index, site, sigma)];
  }
  // Signed coordinate of `site` relative to origin (minimum image when periodic).
  int relative_q(int site) const;
};

// Welford mean / M2 per cell. Samples must be added in realization-index
// order for bit-reproducible results.
class DistributionAccumulator {
 public:
  DistributionAccumulator() = default;
  explicit DistributionAccumulator(std::size_t cells) : mean_(cells, 0.0), m2_(cells, 0.0) {}

  void add(std::span<const double> sample);

  std::size_t cells() const { return mean_.size(); }
  std::int64_t count() const { return count_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& m2() const { return m2_; }
  std::vector<double> std_error() const;

  static DistributionAccumulator restore(std::int64_t count, std::vector<double> mean,
                                         std::vector<double> m2);

  bool operator==(const DistributionAccumulator&) const = default;

 private:
  std::int64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct AccumulateOptions {
  int workers = 1;
  // Realizations simulated per batch before merging; does not affect results.
  std::int64_t batch = 32;
  // Start from a previous partial accumulation (realizations 0..count-1 done).
  const DistributionAccumulator* resume = nullptr;
  // on_checkpoint is called whenever the completed count is a multiple of
  // checkpoint_interval (0 disables).
  std::int64_t checkpoint_interval = 0;
  std::function<void(const DistributionAccumulator&)> on_checkpoint;
  // Stop once this many realizations have been added in this call (-1: no limit).
  std::int64_t stop_after = -1;
};

// One realization's probabilities, layout as DistributionRecord::mean.
std::vector<double> realization_sample(const WalkSpec& spec, const AngleField& angles,
                                       const WalkerState& initial,
                                       std::span<const int> times);

// Runs realizations plan.first_index + i with seeds derive_seed(master, index).
// Returns the accumulator; it is complete when count() == plan.n_realizations.
DistributionAccumulator accumulate_samples(const EnsemblePlan& plan, const WalkSpec& spec,
                                           const InitialStateRecipe& initial,
                                           std::span<const int> times,
                                           const AccumulateOptions& options = {});

DistributionRecord make_record(const DistributionAccumulator& acc, const EnsemblePlan& plan,
                               const WalkSpec& spec, const InitialStateRecipe& initial,
                               std::span<const int> times);

DistributionRecord accumulate_distribution(const EnsemblePlan& plan, const WalkSpec& spec,
                                           const InitialStateRecipe& initial,
                                           std::span<const int> times,
                                           const AccumulateOptions& options = {});

// Spatially integrated Delta P(t) = sum_q [P(t,q,right) - P(t,q,left)].
struct PolarizationSeries {
  std::vector<int> times;
  std::vector<double> dP;
  std::vector<double> std_error;
  bool staggered = false;  // prepared with p0 = pi/2 (mod pi)
  int M = 0;
  double p0 = 0.0;
  double theta_mean = 0.0;
  double phi_mean = 0.0;
  double theta_halfwidth = 0.0;
  double phi_halfwidth = 0.0;
};

PolarizationSeries polarization_series(const DistributionRecord& record);

// Delta P(t, q) for one time index, indexed by site.
std::vector<double> polarization_profile(const DistributionRecord& record,
                                         std::size_t time_index);

struct StaggeringMetric {
  std::vector<double> s;  // (-1)^t Delta P(t), aligned with series.times
  double positive_fraction = 0.0;
  int n_window = 0;
};

// Positive fraction of s(t) over times in [window_start, window_end].
StaggeringMetric staggering_metric(const PolarizationSeries& series, int window_start,
                                   int window_end);

// <|q|>(t) = sum_{q, sigma} |q - q0| P(t, q, sigma), one entry per record time.
std::vector<double> mean_displacement(const DistributionRecord& record);

struct LocalizationFit {
  double xi = 0.0;
  double ci_low = 0.0;   // 95% interval on xi
  double ci_high = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

// Least-squares fit of ln P against distance; xi = -1/slope. Points with
// P <= 0 are skipped. Throws FitError for fewer than 3 points, a non-negative
// slope, or R^2 below min_r_squared.
LocalizationFit fit_exponential_tail(std::span<const double> distance,
                                     std::span<const double> probability,
                                     double min_r_squared = 0.9);

// Fits the spin-summed profile at time index `time_index` over sites with
// q_min <= |q| <= q_max.
LocalizationFit fit_localization_length(const DistributionRecord& record,
                                        std::size_t time_index, int q_min, int q_max,
                                        double min_r_squared = 0.9);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace qwalk
