#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qwalk/disorder.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/walk_spec.hpp"

namespace qwalk {

enum class Scale { kDesk, kPaper };

// Thresholds used by the recipe-level assertions.
struct CheckThresholds {
  int window_start = 5;
  int window_end = 40;
  int contrast_start = 20;
  double contrast_factor = 5.0;
  double sign_fraction_tolerance = 0.25;
  double peak_factor = 3.0;
  double pearson_min = 0.95;

  bool operator==(const CheckThresholds&) const = default;
};

struct AnalyticSettings {
  std::string domain = "time";  // time | frequency
  std::vector<double> t_values{10.0, 100.0, 1000.0};
  std::vector<double> eta_values{1e-4, 1e-6};
  int q_max = 20;

  bool operator==(const AnalyticSettings&) const = default;
};

struct ExperimentConfig {
  std::string recipe = "fig4_critical";
  Scale scale = Scale::kDesk;
  WalkSpec walk;
  EnsemblePlan ensemble;
  InitialStateRecipe initial;
  int t_max = 40;
  // Observation times; empty means every step 0..t_max.
  std::vector<int> times;
  int dos_bins = 256;
  CheckThresholds check;
  AnalyticSettings analytic;
  std::string compare_input;

  // Run controls. They never change results and are excluded from the hash.
  std::string output_dir;
  std::int64_t checkpoint_interval = 0;
  std::int64_t stop_after = -1;
  int workers = 1;

  std::vector<int> observation_times() const;

  bool operator==(const ExperimentConfig&) const = default;
};

std::vector<std::string> recipe_names();

// Defaults of a recipe at the given scale, lattice auto-sized.
ExperimentConfig recipe_defaults(std::string_view recipe, Scale scale = Scale::kDesk);

// Parses "key = value" lines. Blank lines and '#' comments are ignored.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

// Applies recipe defaults, then the file entries, then overrides (later wins).
// Keys are dotted ("walk.theta_halfwidth") or a unique leaf ("theta_halfwidth").
// A walk.n_sites of 0 requests auto-sizing. Errors are ConfigError naming the key.
ExperimentConfig parse_config_text(std::string_view text,
                                   const std::vector<std::string>& overrides = {},
                                   std::string_view default_recipe = "fig4_critical");

ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides = {},
                              std::string_view default_recipe = "fig4_critical");

// Canonical text of every key; parse_config_text(format_config(c)) == c.
std::string format_config(const ExperimentConfig& config);

// Entries of the keys that determine results, in canonical order.
std::vector<std::pair<std::string, std::string>> hashed_entries(const ExperimentConfig& config);

// FNV-1a over the hashed entries, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// Smallest lattice holding the initial state and its light cone for t_max
// steps with an 8-site margin (rounded up to even).
int auto_lattice_size(const InitialStateRecipe& initial, int t_max);

std::string format_double(double value);

}  // namespace qwalk
