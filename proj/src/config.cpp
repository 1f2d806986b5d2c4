#include "qwalk/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_plain_double(const std::string& key, std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError(key, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

// Accepts plain numbers and multiples of pi: "pi", "-pi/2", "3*pi/4", "0.5*pi".
double parse_double(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  const auto pi_at = text.find("pi");
  if (pi_at == std::string::npos) return parse_plain_double(key, text);
  double factor = 1.0;
  std::string_view head(text.data(), pi_at);
  if (head == "-") {
    factor = -1.0;
  } else if (!head.empty() && head != "+") {
    if (head.back() != '*') throw ConfigError(key, "cannot parse '" + text + "'");
    head.remove_suffix(1);
    factor = parse_plain_double(key, head);
  }
  std::string_view tail(text);
  tail.remove_prefix(pi_at + 2);
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError(key, "cannot parse '" + text + "'");
    tail.remove_prefix(1);
    divisor = parse_plain_double(key, tail);
    if (divisor == 0.0) throw ConfigError(key, "division by zero");
  }
  return factor * M_PI / divisor;
}

std::int64_t parse_int(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key, "not an integer: '" + text + "'");
  }
  return value;
}

std::uint64_t parse_uint(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key, "not an unsigned integer: '" + text + "'");
  }
  return value;
}

int parse_ranged_int(const std::string& key, const std::string& raw, std::int64_t lo,
                     std::int64_t hi) {
  const std::int64_t v = parse_int(key, raw);
  if (v < lo || v > hi) {
    throw ConfigError(key, "value " + std::to_string(v) + " outside [" + std::to_string(lo) +
                               ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string text = trim(raw);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key, "not a boolean: '" + text + "'");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> items;
  const std::string text = trim(raw);
  if (text.empty()) return items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

template <typename T, typename Fn>
std::string join(const std::vector<T>& values, Fn&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += fmt(values[i]);
  }
  return out;
}

void check_angle_halfwidth(const std::string& key, double v) {
  if (!(v >= 0.0 && v <= M_PI)) {
    throw ConfigError(key, "halfwidth " + format_double(v) + " outside [0, pi]");
  }
}

void check_angle_mean(const std::string& key, double v) {
  if (!(v > -M_PI && v <= M_PI)) {
    throw ConfigError(key, "mean " + format_double(v) + " outside (-pi, pi]");
  }
}

struct KeySpec {
  std::string name;
  bool hashed;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    auto add = [&](std::string name, bool hashed, auto get, auto set) {
      t.push_back({std::move(name), hashed, get, set});
    };
    add("recipe", true, [](const ExperimentConfig& c) { return c.recipe; },
        [](ExperimentConfig& c, const std::string& v) { c.recipe = trim(v); });
    add("scale", true,
        [](const ExperimentConfig& c) {
          return std::string(c.scale == Scale::kPaper ? "paper" : "desk");
        },
        [](ExperimentConfig& c, const std::string& v) {
          const std::string s = trim(v);
          if (s == "desk") c.scale = Scale::kDesk;
          else if (s == "paper") c.scale = Scale::kPaper;
          else throw ConfigError("scale", "expected desk or paper, got '" + s + "'");
        });
    add("walk.n_sites", true, [](const ExperimentConfig& c) { return std::to_string(c.walk.n_sites); },
        [](ExperimentConfig& c, const std::string& v) {
          const int n = parse_ranged_int("walk.n_sites", v, 0, 1 << 24);
          if (n == 1) throw ConfigError("walk.n_sites", "need at least 2 sites (0 = auto)");
          c.walk.n_sites = n;
        });
    add("walk.boundary", true,
        [](const ExperimentConfig& c) { return std::string(to_string(c.walk.boundary)); },
        [](ExperimentConfig& c, const std::string& v) {
          try {
            c.walk.boundary = parse_boundary(trim(v));
          } catch (const Error& e) {
            throw ConfigError("walk.boundary", e.what());
          }
        });
    add("walk.theta_mean", true, [](const ExperimentConfig& c) { return format_double(c.walk.theta_mean); },
        [](ExperimentConfig& c, const std::string& v) {
          c.walk.theta_mean = parse_double("walk.theta_mean", v);
          check_angle_mean("walk.theta_mean", c.walk.theta_mean);
        });
    add("walk.phi_mean", true, [](const ExperimentConfig& c) { return format_double(c.walk.phi_mean); },
        [](ExperimentConfig& c, const std::string& v) {
          c.walk.phi_mean = parse_double("walk.phi_mean", v);
          check_angle_mean("walk.phi_mean", c.walk.phi_mean);
        });
    add("walk.theta_halfwidth", true,
        [](const ExperimentConfig& c) { return format_double(c.walk.theta_halfwidth); },
        [](ExperimentConfig& c, const std::string& v) {
          c.walk.theta_halfwidth = parse_double("walk.theta_halfwidth", v);
          check_angle_halfwidth("walk.theta_halfwidth", c.walk.theta_halfwidth);
        });
    add("walk.phi_halfwidth", true,
        [](const ExperimentConfig& c) { return format_double(c.walk.phi_halfwidth); },
        [](ExperimentConfig& c, const std::string& v) {
          c.walk.phi_halfwidth = parse_double("walk.phi_halfwidth", v);
          check_angle_halfwidth("walk.phi_halfwidth", c.walk.phi_halfwidth);
        });
    add("walk.chiral_constraint", true,
        [](const ExperimentConfig& c) { return std::string(c.walk.chiral_constraint ? "true" : "false"); },
        [](ExperimentConfig& c, const std::string& v) {
          c.walk.chiral_constraint = parse_bool("walk.chiral_constraint", v);
        });
    add("ensemble.master_seed", true,
        [](const ExperimentConfig& c) { return std::to_string(c.ensemble.master_seed); },
        [](ExperimentConfig& c, const std::string& v) {
          c.ensemble.master_seed = parse_uint("ensemble.master_seed", v);
        });
    add("ensemble.realizations", true,
        [](const ExperimentConfig& c) { return std::to_string(c.ensemble.n_realizations); },
        [](ExperimentConfig& c, const std::string& v) {
          const std::int64_t n = parse_int("ensemble.realizations", v);
          if (n < 1) throw ConfigError("ensemble.realizations", "must be >= 1");
          c.ensemble.n_realizations = n;
        });
    add("initial.kind", true,
        [](const ExperimentConfig& c) {
          return std::string(c.initial.kind == InitialStateRecipe::Kind::kLocalized ? "localized"
                                                                                    : "delocalized");
        },
        [](ExperimentConfig& c, const std::string& v) {
          const std::string s = trim(v);
          if (s == "localized") c.initial.kind = InitialStateRecipe::Kind::kLocalized;
          else if (s == "delocalized") c.initial.kind = InitialStateRecipe::Kind::kDelocalized;
          else throw ConfigError("initial.kind", "expected localized or delocalized, got '" + s + "'");
        });
    add("initial.M", true, [](const ExperimentConfig& c) { return std::to_string(c.initial.M); },
        [](ExperimentConfig& c, const std::string& v) {
          const int m = parse_ranged_int("initial.M", v, 0, 1 << 22);
          if (m % 2 != 0) throw ConfigError("initial.M", "must be even");
          c.initial.M = m;
        });
    add("initial.p0", true, [](const ExperimentConfig& c) { return format_double(c.initial.p0); },
        [](ExperimentConfig& c, const std::string& v) { c.initial.p0 = parse_double("initial.p0", v); });
    add("initial.q0", true, [](const ExperimentConfig& c) { return std::to_string(c.initial.q0_offset); },
        [](ExperimentConfig& c, const std::string& v) {
          c.initial.q0_offset = parse_ranged_int("initial.q0", v, -(1 << 24), 1 << 24);
        });
    add("initial.chirality", true,
        [](const ExperimentConfig& c) {
          return std::string(c.initial.chirality == Chirality::kRight ? "right" : "left");
        },
        [](ExperimentConfig& c, const std::string& v) {
          const std::string s = trim(v);
          if (s == "right") c.initial.chirality = Chirality::kRight;
          else if (s == "left") c.initial.chirality = Chirality::kLeft;
          else throw ConfigError("initial.chirality", "expected right or left, got '" + s + "'");
        });
    add("run.t_max", true, [](const ExperimentConfig& c) { return std::to_string(c.t_max); },
        [](ExperimentConfig& c, const std::string& v) {
          c.t_max = parse_ranged_int("run.t_max", v, 0, 1 << 24);
        });
    add("run.times", true,
        [](const ExperimentConfig& c) {
          return join(c.times, [](int t) { return std::to_string(t); });
        },
        [](ExperimentConfig& c, const std::string& v) {
          c.times.clear();
          for (const auto& item : split_list(v)) {
            c.times.push_back(parse_ranged_int("run.times", item, 0, 1 << 24));
          }
          if (!std::is_sorted(c.times.begin(), c.times.end()) ||
              std::adjacent_find(c.times.begin(), c.times.end()) != c.times.end()) {
            throw ConfigError("run.times", "times must be strictly ascending");
          }
        });
    add("dos.bins", true, [](const ExperimentConfig& c) { return std::to_string(c.dos_bins); },
        [](ExperimentConfig& c, const std::string& v) {
          c.dos_bins = parse_ranged_int("dos.bins", v, 1, 1 << 20);
        });
    add("check.window_start", true,
        [](const ExperimentConfig& c) { return std::to_string(c.check.window_start); },
        [](ExperimentConfig& c, const std::string& v) {
          c.check.window_start = parse_ranged_int("check.window_start", v, 0, 1 << 24);
        });
    add("check.window_end", true,
        [](const ExperimentConfig& c) { return std::to_string(c.check.window_end); },
        [](ExperimentConfig& c, const std::string& v) {
          c.check.window_end = parse_ranged_int("check.window_end", v, 0, 1 << 24);
        });
    add("check.contrast_start", true,
        [](const ExperimentConfig& c) { return std::to_string(c.check.contrast_start); },
        [](ExperimentConfig& c, const std::string& v) {
          c.check.contrast_start = parse_ranged_int("check.contrast_start", v, 0, 1 << 24);
        });
    add("check.contrast_factor", true,
        [](const ExperimentConfig& c) { return format_double(c.check.contrast_factor); },
        [](ExperimentConfig& c, const std::string& v) {
          c.check.contrast_factor = parse_double("check.contrast_factor", v);
          if (!(c.check.contrast_factor > 0.0)) throw ConfigError("check.contrast_factor", "must be > 0");
        });
    add("check.sign_fraction_tolerance", true,
        [](const ExperimentConfig& c) { return format_double(c.check.sign_fraction_tolerance); },
        [](ExperimentConfig& c, const std::string& v) {
          c.check.sign_fraction_tolerance = parse_double("check.sign_fraction_tolerance", v);
          if (!(c.check.sign_fraction_tolerance >= 0.0 && c.check.sign_fraction_tolerance <= 0.5)) {
            throw ConfigError("check.sign_fraction_tolerance", "must lie in [0, 0.5]");
          }
        });
    add("check.peak_factor", true,
        [](const ExperimentConfig& c) { return format_double(c.check.peak_factor); },
        [](ExperimentConfig& c, const std::string& v) {
          c.check.peak_factor = parse_double("check.peak_factor", v);
          if (!(c.check.peak_factor > 0.0)) throw ConfigError("check.peak_factor", "must be > 0");
        });
    add("check.pearson_min", true,
        [](const ExperimentConfig& c) { return format_double(c.check.pearson_min); },
        [](ExperimentConfig& c, const std::string& v) {
          c.check.pearson_min = parse_double("check.pearson_min", v);
          if (!(c.check.pearson_min >= -1.0 && c.check.pearson_min <= 1.0)) {
            throw ConfigError("check.pearson_min", "must lie in [-1, 1]");
          }
        });
    add("analytic.domain", true, [](const ExperimentConfig& c) { return c.analytic.domain; },
        [](ExperimentConfig& c, const std::string& v) {
          const std::string s = trim(v);
          if (s != "time" && s != "frequency") {
            throw ConfigError("analytic.domain", "expected time or frequency, got '" + s + "'");
          }
          c.analytic.domain = s;
        });
    add("analytic.t_values", true,
        [](const ExperimentConfig& c) { return join(c.analytic.t_values, format_double); },
        [](ExperimentConfig& c, const std::string& v) {
          c.analytic.t_values.clear();
          for (const auto& item : split_list(v)) {
            const double t = parse_double("analytic.t_values", item);
            if (!(t > 1.0)) throw ConfigError("analytic.t_values", "every t must exceed 1");
            c.analytic.t_values.push_back(t);
          }
        });
    add("analytic.eta_values", true,
        [](const ExperimentConfig& c) { return join(c.analytic.eta_values, format_double); },
        [](ExperimentConfig& c, const std::string& v) {
          c.analytic.eta_values.clear();
          for (const auto& item : split_list(v)) {
            const double eta = parse_double("analytic.eta_values", item);
            if (!(eta > 0.0 && eta < 0.1)) {
              throw ConfigError("analytic.eta_values", "every eta must lie in (0, 0.1)");
            }
            c.analytic.eta_values.push_back(eta);
          }
        });
    add("analytic.q_max", true, [](const ExperimentConfig& c) { return std::to_string(c.analytic.q_max); },
        [](ExperimentConfig& c, const std::string& v) {
          c.analytic.q_max = parse_ranged_int("analytic.q_max", v, 0, 1 << 20);
        });
    add("compare.input", false, [](const ExperimentConfig& c) { return c.compare_input; },
        [](ExperimentConfig& c, const std::string& v) { c.compare_input = trim(v); });
    add("output.dir", false, [](const ExperimentConfig& c) { return c.output_dir; },
        [](ExperimentConfig& c, const std::string& v) { c.output_dir = trim(v); });
    add("run.checkpoint_interval", false,
        [](const ExperimentConfig& c) { return std::to_string(c.checkpoint_interval); },
        [](ExperimentConfig& c, const std::string& v) {
          const std::int64_t n = parse_int("run.checkpoint_interval", v);
          if (n < 0) throw ConfigError("run.checkpoint_interval", "must be >= 0");
          c.checkpoint_interval = n;
        });
    add("run.stop_after", false, [](const ExperimentConfig& c) { return std::to_string(c.stop_after); },
        [](ExperimentConfig& c, const std::string& v) {
          const std::int64_t n = parse_int("run.stop_after", v);
          if (n < -1) throw ConfigError("run.stop_after", "must be >= -1");
          c.stop_after = n;
        });
    add("run.workers", false, [](const ExperimentConfig& c) { return std::to_string(c.workers); },
        [](ExperimentConfig& c, const std::string& v) {
          c.workers = parse_ranged_int("run.workers", v, 1, 1024);
        });
    return t;
  }();
  return table;
}

const KeySpec& find_key(const std::string& raw_key) {
  const auto& table = key_table();
  for (const auto& k : table) {
    if (k.name == raw_key) return k;
  }
  const KeySpec* match = nullptr;
  for (const auto& k : table) {
    const auto dot = k.name.rfind('.');
    const std::string leaf = dot == std::string::npos ? k.name : k.name.substr(dot + 1);
    if (leaf == raw_key) {
      if (match) throw ConfigError(raw_key, "ambiguous key; use the dotted form");
      match = &k;
    }
  }
  if (!match) throw ConfigError(raw_key, "unknown key");
  return *match;
}

void check_consistency(const ExperimentConfig& c) {
  for (int t : c.times) {
    if (t > c.t_max) throw ConfigError("run.times", "time " + std::to_string(t) + " exceeds run.t_max");
  }
  if (c.check.window_end < c.check.window_start) {
    throw ConfigError("check.window_end", "must be >= check.window_start");
  }
  try {
    c.walk.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError("walk", e.what());
  }
  const bool evolves = c.recipe.starts_with("fig") || c.recipe == "compare" || c.recipe == "sinai";
  if (!evolves) return;
  const int need = auto_lattice_size(c.initial, c.t_max);
  if (c.walk.boundary == Boundary::kOpen && c.walk.n_sites < need) {
    throw ConfigError("walk.n_sites", std::to_string(c.walk.n_sites) +
                                          " sites cannot hold the initial state for run.t_max = " +
                                          std::to_string(c.t_max) + " steps (need " +
                                          std::to_string(need) + ")");
  }
  if (c.initial.kind == InitialStateRecipe::Kind::kDelocalized && c.walk.n_sites < 2 * c.initial.M + 1) {
    throw ConfigError("walk.n_sites", "lattice smaller than the initial state (2M + 1 sites)");
  }
  if (c.initial.kind == InitialStateRecipe::Kind::kLocalized) {
    const int q0 = lattice_center(c.walk.n_sites) + c.initial.q0_offset;
    if (q0 < 0 || q0 >= c.walk.n_sites) throw ConfigError("initial.q0", "site outside the lattice");
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

int auto_lattice_size(const InitialStateRecipe& initial, int t_max) {
  const int width = initial.kind == InitialStateRecipe::Kind::kDelocalized ? 2 * initial.M + 1 : 1;
  const int reach = 2 * std::abs(initial.kind == InitialStateRecipe::Kind::kLocalized ? initial.q0_offset : 0);
  const int n = width + reach + 2 * t_max + 8;
  return n + (n % 2);
}

std::vector<int> ExperimentConfig::observation_times() const {
  if (!times.empty()) return times;
  std::vector<int> all(static_cast<std::size_t>(t_max) + 1);
  for (int t = 0; t <= t_max; ++t) all[static_cast<std::size_t>(t)] = t;
  return all;
}

std::vector<std::string> recipe_names() {
  return {"fig4_critical", "fig4_noncritical", "fig5_critical", "fig5_noncritical",
          "fig4_phi_only",  "dos",              "sinai",         "dispersion",
          "analytic",       "phase",            "symmetries",    "compare"};
}

ExperimentConfig recipe_defaults(std::string_view recipe, Scale scale) {
  const auto names = recipe_names();
  if (std::find(names.begin(), names.end(), recipe) == names.end()) {
    throw ConfigError("recipe", "unknown recipe '" + std::string(recipe) + "'");
  }
  const bool paper = scale == Scale::kPaper;
  ExperimentConfig c;
  c.recipe = std::string(recipe);
  c.scale = scale;
  c.ensemble.master_seed = 20240611;
  c.walk.chiral_constraint = true;

  const bool polarization = recipe.starts_with("fig") || recipe == "compare";
  if (polarization) {
    const bool critical = recipe.ends_with("_critical") || recipe == "fig4_phi_only" ||
                          recipe == "compare";
    c.walk.boundary = Boundary::kOpen;
    c.walk.theta_mean = critical ? 0.0 : M_PI / 2;
    c.walk.theta_halfwidth = recipe == "fig4_phi_only" ? 0.0 : M_PI / 8;
    c.walk.phi_halfwidth = M_PI / 8;
    c.initial.kind = InitialStateRecipe::Kind::kDelocalized;
    c.initial.M = 100;
    c.initial.p0 = recipe.starts_with("fig5") ? M_PI / 2 : 0.0;
    c.t_max = 40;
    c.ensemble.n_realizations = paper ? 5000 : 500;
  } else if (recipe == "dos") {
    c.walk.boundary = Boundary::kPeriodic;
    c.walk.theta_halfwidth = M_PI / 4;
    c.walk.phi_halfwidth = M_PI / 4;
    c.walk.n_sites = paper ? 400 : 200;
    c.ensemble.n_realizations = paper ? 1000 : 200;
    c.t_max = 0;
  } else if (recipe == "sinai") {
    c.walk.boundary = Boundary::kPeriodic;
    c.walk.theta_halfwidth = M_PI;
    c.walk.phi_halfwidth = M_PI;
    c.initial.kind = InitialStateRecipe::Kind::kLocalized;
    c.initial.chirality = Chirality::kRight;
    c.t_max = 1024;
    c.times = {0, 16, 32, 64, 128, 256, 512, 1024};
    c.ensemble.n_realizations = paper ? 10000 : 2000;
  } else if (recipe == "dispersion") {
    c.walk.boundary = Boundary::kPeriodic;
    c.walk.theta_mean = M_PI / 4;
    c.walk.n_sites = 200;
    c.t_max = 0;
  } else if (recipe == "phase") {
    c.walk.theta_mean = M_PI / 2;
    c.walk.theta_halfwidth = M_PI / 8;
    c.walk.phi_halfwidth = M_PI / 8;
    c.walk.n_sites = 2;
    c.t_max = 0;
  } else if (recipe == "symmetries") {
    c.walk.boundary = Boundary::kPeriodic;
    c.walk.theta_halfwidth = M_PI / 8;
    c.walk.phi_halfwidth = M_PI / 8;
    c.walk.n_sites = 64;
    c.t_max = 0;
  } else if (recipe == "analytic") {
    c.walk.n_sites = 2;
    c.t_max = 0;
  }
  if (polarization || recipe == "sinai") {
    c.walk.n_sites = auto_lattice_size(c.initial, c.t_max);
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
    entries.emplace_back(std::move(key), trim(std::string_view(line).substr(eq + 1)));
  }
  return entries;
}

ExperimentConfig parse_config_text(std::string_view text, const std::vector<std::string>& overrides,
                                   std::string_view default_recipe) {
  auto entries = parse_key_values(text);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError(o, "override must have the form key=value");
    entries.emplace_back(trim(std::string_view(o).substr(0, eq)),
                         trim(std::string_view(o).substr(eq + 1)));
  }

  std::string recipe(default_recipe);
  std::string scale_text = "desk";
  bool n_sites_given = false;
  for (const auto& [key, value] : entries) {
    const auto& spec = find_key(key);
    if (spec.name == "recipe") recipe = value;
    if (spec.name == "scale") scale_text = value;
    if (spec.name == "walk.n_sites") n_sites_given = true;
  }
  ExperimentConfig probe;
  find_key("scale").set(probe, scale_text);
  ExperimentConfig config = recipe_defaults(recipe, probe.scale);

  for (const auto& [key, value] : entries) find_key(key).set(config, value);

  const bool recipe_sizes = recipe.starts_with("fig") || recipe == "compare" || recipe == "sinai";
  if (config.walk.n_sites == 0 || (recipe_sizes && !n_sites_given)) {
    config.walk.n_sites = auto_lattice_size(config.initial, config.t_max);
  }
  check_consistency(config);
  return config;
}

ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides,
                              std::string_view default_recipe) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config_text(text, overrides, default_recipe);
}

std::string format_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& k : key_table()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> hashed_entries(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : key_table()) {
    if (k.hashed) out.emplace_back(k.name, k.get(config));
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [key, value] : hashed_entries(config)) {
    for (char ch : key + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qwalk
