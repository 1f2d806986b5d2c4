#include "qwalk/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "qwalk/errors.hpp"
#include "qwalk/parallel.hpp"

namespace qwalk {

SpinProbabilities spin_resolved_probability(const WalkerState& state) {
  const int n = state.n_sites();
  SpinProbabilities p;
  p.right.resize(static_cast<std::size_t>(n));
  p.left.resize(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) {
    const double ur = state.up(q).real(), ui = state.up(q).imag();
    const double dr = state.down(q).real(), di = state.down(q).imag();
    // <right|psi> = (u - i d)/sqrt2, <left|psi> = (u + i d)/sqrt2
    p.right[static_cast<std::size_t>(q)] = 0.5 * ((ur + di) * (ur + di) + (ui - dr) * (ui - dr));
    p.left[static_cast<std::size_t>(q)] = 0.5 * ((ur - di) * (ur - di) + (ui + dr) * (ui + dr));
  }
  return p;
}

int initial_origin(const WalkSpec& spec, const InitialStateRecipe& recipe) {
  const int center = lattice_center(spec.n_sites);
  return recipe.kind == InitialStateRecipe::Kind::kLocalized ? center + recipe.q0_offset
                                                             : center;
}

WalkerState prepare_initial_state(const WalkSpec& spec, const InitialStateRecipe& recipe,
                                  int planned_steps) {
  if (recipe.kind == InitialStateRecipe::Kind::kDelocalized) {
    return make_delocalized_state(spec, recipe.M, recipe.p0, planned_steps);
  }
  const int q0 = initial_origin(spec, recipe);
  if (spec.boundary == Boundary::kOpen &&
      (q0 - planned_steps < 1 || q0 + planned_steps > spec.n_sites - 2)) {
    throw PreconditionError("open lattice of " + std::to_string(spec.n_sites) +
                            " sites too small for " + std::to_string(planned_steps) +
                            " steps from site " + std::to_string(q0));
  }
  return make_localized_state(spec, q0, recipe.chirality);
}

int DistributionRecord::relative_q(int site) const {
  int d = site - origin;
  if (spec.boundary == Boundary::kPeriodic) {
    const int n = spec.n_sites;
    d %= n;
    if (d > n / 2) d -= n;
    if (d <= -(n + 1) / 2) d += n;
  }
  return d;
}

void DistributionAccumulator::add(std::span<const double> sample) {
  if (sample.size() != mean_.size()) {
    throw PreconditionError("sample size does not match accumulator");
  }
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t k = 0; k < mean_.size(); ++k) {
    const double delta = sample[k] - mean_[k];
    mean_[k] += delta / n;
    m2_[k] += delta * (sample[k] - mean_[k]);
  }
}

std::vector<double> DistributionAccumulator::std_error() const {
  std::vector<double> se(mean_.size(), 0.0);
  if (count_ < 2) return se;
  const double n = static_cast<double>(count_);
  for (std::size_t k = 0; k < se.size(); ++k) {
    se[k] = std::sqrt(std::max(0.0, m2_[k]) / (n - 1.0) / n);
  }
  return se;
}

DistributionAccumulator DistributionAccumulator::restore(std::int64_t count,
                                                         std::vector<double> mean,
                                                         std::vector<double> m2) {
  if (count < 0 || mean.size() != m2.size()) {
    throw PreconditionError("inconsistent accumulator state");
  }
  DistributionAccumulator acc;
  acc.count_ = count;
  acc.mean_ = std::move(mean);
  acc.m2_ = std::move(m2);
  return acc;
}

namespace {

void check_times(std::span<const int> times) {
  if (times.empty()) throw PreconditionError("no observation times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0 || (i > 0 && times[i] <= times[i - 1])) {
      throw PreconditionError("observation times must be non-negative and strictly ascending");
    }
  }
}

}  // namespace

std::vector<double> realization_sample(const WalkSpec& spec, const AngleField& angles,
                                       const WalkerState& initial,
                                       std::span<const int> times) {
  check_times(times);
  const auto n = static_cast<std::size_t>(spec.n_sites);
  std::vector<double> sample(times.size() * n * 2);
  FloquetStepper stepper(angles, spec);
  std::size_t ti = 0;
  evolve_visit(initial, stepper, times, [&](int, const WalkerState& state) {
    double* out = sample.data() + ti * n * 2;
    const auto p = spin_resolved_probability(state);
    for (std::size_t q = 0; q < n; ++q) {
      out[2 * q] = p.right[q];
      out[2 * q + 1] = p.left[q];
    }
    ++ti;
  });
  return sample;
}

DistributionAccumulator accumulate_samples(const EnsemblePlan& plan, const WalkSpec& spec,
                                           const InitialStateRecipe& initial,
                                           std::span<const int> times,
                                           const AccumulateOptions& options) {
  spec.validate();
  check_times(times);
  if (plan.n_realizations < 1) throw PreconditionError("n_realizations must be >= 1");
  const std::size_t cells = times.size() * static_cast<std::size_t>(spec.n_sites) * 2;

  DistributionAccumulator acc = options.resume ? *options.resume : DistributionAccumulator(cells);
  if (acc.cells() != cells || acc.count() > plan.n_realizations) {
    throw PreconditionError("resume state does not match this ensemble");
  }
  const WalkerState start = prepare_initial_state(spec, initial, times.back());
  const std::int64_t batch_size = std::max<std::int64_t>(1, options.batch);

  std::int64_t done = 0;
  std::vector<std::vector<double>> slots;
  while (acc.count() < plan.n_realizations) {
    if (options.stop_after >= 0 && done >= options.stop_after) break;
    std::int64_t batch = std::min(batch_size, plan.n_realizations - acc.count());
    if (options.checkpoint_interval > 0) {
      batch = std::min(batch, options.checkpoint_interval -
                                  acc.count() % options.checkpoint_interval);
    }
    if (options.stop_after >= 0) batch = std::min(batch, options.stop_after - done);

    slots.resize(static_cast<std::size_t>(batch));
    const std::int64_t base = plan.first_index + acc.count();
    parallel_for_index(batch, options.workers, [&](std::int64_t i) {
      const auto seed = derive_seed(plan.master_seed, static_cast<std::uint64_t>(base + i));
      const AngleField field = sample_realization(spec, seed);
      slots[static_cast<std::size_t>(i)] = realization_sample(spec, field, start, times);
    });
    for (std::int64_t i = 0; i < batch; ++i) acc.add(slots[static_cast<std::size_t>(i)]);
    done += batch;

    if (options.checkpoint_interval > 0 && options.on_checkpoint &&
        acc.count() % options.checkpoint_interval == 0) {
      options.on_checkpoint(acc);
    }
  }
  return acc;
}

DistributionRecord make_record(const DistributionAccumulator& acc, const EnsemblePlan& plan,
                               const WalkSpec& spec, const InitialStateRecipe& initial,
                               std::span<const int> times) {
  DistributionRecord r;
  r.spec = spec;
  r.initial = initial;
  r.times.assign(times.begin(), times.end());
  r.origin = initial_origin(spec, initial);
  r.n_realizations = acc.count();
  r.master_seed = plan.master_seed;
  r.mean = acc.mean();
  r.std_error = acc.std_error();
  if (r.mean.size() != r.times.size() * static_cast<std::size_t>(spec.n_sites) * 2) {
    throw PreconditionError("accumulator does not match record layout");
  }
  return r;
}

DistributionRecord accumulate_distribution(const EnsemblePlan& plan, const WalkSpec& spec,
                                           const InitialStateRecipe& initial,
                                           std::span<const int> times,
                                           const AccumulateOptions& options) {
  const auto acc = accumulate_samples(plan, spec, initial, times, options);
  return make_record(acc, plan, spec, initial, times);
}

PolarizationSeries polarization_series(const DistributionRecord& record) {
  PolarizationSeries s;
  s.times = record.times;
  s.dP.resize(record.times.size());
  s.std_error.resize(record.times.size());
  for (std::size_t ti = 0; ti < record.times.size(); ++ti) {
    double sum = 0.0, var = 0.0;
    for (int q = 0; q < record.n_sites(); ++q) {
      sum += record.P(ti, q, kSigmaRight) - record.P(ti, q, kSigmaLeft);
      const double er = record.P_error(ti, q, kSigmaRight);
      const double el = record.P_error(ti, q, kSigmaLeft);
      var += er * er + el * el;
    }
    s.dP[ti] = sum;
    s.std_error[ti] = std::sqrt(var);
  }
  const bool delocalized = record.initial.kind == InitialStateRecipe::Kind::kDelocalized;
  s.M = delocalized ? record.initial.M : 0;
  s.p0 = delocalized ? record.initial.p0 : 0.0;
  s.staggered = delocalized && std::abs(std::remainder(s.p0 - 0.5 * M_PI, M_PI)) < 1e-9;
  s.theta_mean = record.spec.theta_mean;
  s.phi_mean = record.spec.phi_mean;
  s.theta_halfwidth = record.spec.theta_halfwidth;
  s.phi_halfwidth = record.spec.phi_halfwidth;
  return s;
}

std::vector<double> polarization_profile(const DistributionRecord& record,
                                         std::size_t time_index) {
  std::vector<double> profile(static_cast<std::size_t>(record.n_sites()));
  for (int q = 0; q < record.n_sites(); ++q) {
    profile[static_cast<std::size_t>(q)] =
        record.P(time_index, q, kSigmaRight) - record.P(time_index, q, kSigmaLeft);
  }
  return profile;
}

StaggeringMetric staggering_metric(const PolarizationSeries& series, int window_start,
                                   int window_end) {
  StaggeringMetric m;
  m.s.resize(series.dP.size());
  int positive = 0;
  for (std::size_t i = 0; i < series.dP.size(); ++i) {
    const int t = series.times[i];
    m.s[i] = (t % 2 == 0 ? 1.0 : -1.0) * series.dP[i];
    if (t >= window_start && t <= window_end) {
      ++m.n_window;
      if (m.s[i] > 0.0) ++positive;
    }
  }
  m.positive_fraction = m.n_window > 0 ? static_cast<double>(positive) / m.n_window : 0.0;
  return m;
}

std::vector<double> mean_displacement(const DistributionRecord& record) {
  std::vector<double> out(record.times.size(), 0.0);
  for (std::size_t ti = 0; ti < record.times.size(); ++ti) {
    double sum = 0.0;
    for (int q = 0; q < record.n_sites(); ++q) {
      sum += std::abs(record.relative_q(q)) *
             (record.P(ti, q, kSigmaRight) + record.P(ti, q, kSigmaLeft));
    }
    out[ti] = sum;
  }
  return out;
}

LocalizationFit fit_exponential_tail(std::span<const double> distance,
                                     std::span<const double> probability,
                                     double min_r_squared) {
  if (distance.size() != probability.size()) {
    throw PreconditionError("distance and probability lengths differ");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < distance.size(); ++i) {
    if (probability[i] > 0.0) {
      x.push_back(distance[i]);
      y.push_back(std::log(probability[i]));
    }
  }
  const std::size_t n = x.size();
  if (n < 3) throw FitError("need at least 3 points with P > 0, got " + std::to_string(n));

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw FitError("all points at the same distance");
  const double slope = sxy / sxx;
  const double ss_res = std::max(0.0, syy - slope * sxy);
  // Flat or rising profiles carry no decay length.
  if (!(slope < 0.0) || syy <= 0.0) throw FitError("profile does not decay (slope >= 0)");
  const double r2 = 1.0 - ss_res / syy;
  if (r2 < min_r_squared) {
    throw FitError("exponential fit too noisy: R^2 = " + std::to_string(r2));
  }

  LocalizationFit fit;
  fit.slope = slope;
  fit.xi = -1.0 / slope;
  fit.r_squared = r2;
  fit.n_points = static_cast<int>(n);
  const double se = std::sqrt(ss_res / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double half = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  fit.ci_low = -1.0 / (slope - half);
  fit.ci_high = slope + half < 0.0 ? -1.0 / (slope + half)
                                   : std::numeric_limits<double>::infinity();
  return fit;
}

LocalizationFit fit_localization_length(const DistributionRecord& record,
                                        std::size_t time_index, int q_min, int q_max,
                                        double min_r_squared) {
  if (time_index >= record.times.size()) throw PreconditionError("time index out of range");
  std::vector<double> d, p;
  for (int q = 0; q < record.n_sites(); ++q) {
    const int r = std::abs(record.relative_q(q));
    if (r < q_min || r > q_max) continue;
    d.push_back(r);
    p.push_back(record.P(time_index, q, kSigmaRight) + record.P(time_index, q, kSigmaLeft));
  }
  return fit_exponential_tail(d, p, min_r_squared);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw PreconditionError("pearson needs two equal-length series of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace qwalk
