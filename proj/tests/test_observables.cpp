#include <cmath>
#include <random>

#include "doctest.h"
#include "qwalk/errors.hpp"
#include "qwalk/observables.hpp"

using namespace qwalk;

namespace {

WalkSpec make_spec(int n, Boundary b, double hw, double theta = 0.0, double phi = 0.0) {
  WalkSpec s;
  s.n_sites = n;
  s.boundary = b;
  s.theta_mean = theta;
  s.phi_mean = phi;
  s.theta_halfwidth = hw;
  s.phi_halfwidth = hw;
  return s;
}

InitialStateRecipe localized(int offset = 0, Chirality c = Chirality::kRight) {
  InitialStateRecipe r;
  r.kind = InitialStateRecipe::Kind::kLocalized;
  r.q0_offset = offset;
  r.chirality = c;
  return r;
}

InitialStateRecipe delocalized(int M, double p0) {
  InitialStateRecipe r;
  r.M = M;
  r.p0 = p0;
  return r;
}

std::vector<int> range_times(int t_max) {
  std::vector<int> t;
  for (int i = 0; i <= t_max; ++i) t.push_back(i);
  return t;
}

}  // namespace

TEST_SUITE("observables") {

TEST_CASE("spin projections") {
  const WalkSpec spec = make_spec(4, Boundary::kPeriodic, 0.0);
  const auto r = spin_resolved_probability(make_localized_state(spec, 1, Chirality::kRight));
  CHECK(r.right[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(r.left[1]) < 1e-15);
  const auto l = spin_resolved_probability(make_localized_state(spec, 2, Chirality::kLeft));
  CHECK(l.left[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(l.right[2]) < 1e-15);

  WalkerState up(4);
  up.up(3) = 1.0;
  const auto u = spin_resolved_probability(up);
  CHECK(u.right[3] == doctest::Approx(0.5));
  CHECK(u.left[3] == doctest::Approx(0.5));
  CHECK(u.right[0] == 0.0);
}

TEST_CASE("single realization ensemble equals a direct run") {
  const WalkSpec spec = make_spec(40, Boundary::kPeriodic, M_PI / 8, 0.2, 0.1);
  const auto times = range_times(10);
  const EnsemblePlan plan{99, 1, 0};
  const DistributionRecord rec = accumulate_distribution(plan, spec, localized(), times);
  const AngleField field = sample_realization(spec, derive_seed(99, 0));
  const WalkerState start = prepare_initial_state(spec, localized(), 10);
  const auto direct = realization_sample(spec, field, start, times);
  CHECK(rec.mean == direct);
  for (double e : rec.std_error) CHECK(e == 0.0);
}

TEST_CASE("clean ensemble has zero spread") {
  const WalkSpec spec = make_spec(30, Boundary::kPeriodic, 0.0, 0.4, 0.3);
  const auto times = range_times(8);
  const DistributionRecord rec = accumulate_distribution({1, 6, 0}, spec, localized(), times);
  for (double e : rec.std_error) CHECK(e == 0.0);
}

TEST_CASE("probability is conserved and bounded") {
  const WalkSpec spec = make_spec(50, Boundary::kPeriodic, M_PI / 4);
  const auto times = range_times(30);
  const DistributionRecord rec = accumulate_distribution({5, 8, 0}, spec, localized(), times);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    double total = 0.0;
    for (int q = 0; q < 50; ++q) {
      for (int s : {kSigmaRight, kSigmaLeft}) {
        const double p = rec.P(ti, q, s);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0 + 1e-14);
        total += p;
      }
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("parity of the support") {
  const WalkSpec spec = make_spec(60, Boundary::kPeriodic, M_PI / 3, 0.5, 0.2);
  const auto times = range_times(12);
  const DistributionRecord rec = accumulate_distribution({2, 3, 0}, spec, localized(3), times);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    for (int q = 0; q < 60; ++q) {
      if (((rec.relative_q(q) - times[ti]) % 2 + 2) % 2 == 1) {
        CHECK(rec.P(ti, q, kSigmaRight) + rec.P(ti, q, kSigmaLeft) < 1e-28);
      }
    }
  }
}

TEST_CASE("worker count and batch size do not change the result") {
  const WalkSpec spec = make_spec(64, Boundary::kPeriodic, M_PI / 8);
  const auto times = range_times(20);
  const EnsemblePlan plan{31, 37, 0};
  AccumulateOptions base;
  const auto ref = accumulate_samples(plan, spec, delocalized(10, 0.0), times, base);
  for (int workers : {4, 16}) {
    for (std::int64_t batch : {1, 5, 64}) {
      AccumulateOptions o;
      o.workers = workers;
      o.batch = batch;
      CHECK(accumulate_samples(plan, spec, delocalized(10, 0.0), times, o) == ref);
    }
  }
}

TEST_CASE("interrupt and resume are bit-exact") {
  const WalkSpec spec = make_spec(48, Boundary::kPeriodic, M_PI / 8);
  const auto times = range_times(15);
  const EnsemblePlan plan{8, 25, 0};
  const auto ref = accumulate_samples(plan, spec, localized(), times);
  for (std::int64_t stop : {0, 1, 7, 24}) {
    for (std::int64_t interval : {0, 3, 10}) {
      AccumulateOptions first;
      first.stop_after = stop;
      first.checkpoint_interval = interval;
      first.workers = 3;
      const auto partial = accumulate_samples(plan, spec, localized(), times, first);
      CHECK(partial.count() == stop);
      AccumulateOptions second;
      second.resume = &partial;
      second.workers = 2;
      CHECK(accumulate_samples(plan, spec, localized(), times, second) == ref);
    }
  }
}

TEST_CASE("checkpoint callback cadence") {
  const WalkSpec spec = make_spec(20, Boundary::kPeriodic, 0.1);
  const auto times = range_times(4);
  std::vector<std::int64_t> seen;
  AccumulateOptions o;
  o.checkpoint_interval = 7;
  o.batch = 4;
  o.on_checkpoint = [&](const DistributionAccumulator& a) { seen.push_back(a.count()); };
  accumulate_samples({1, 30, 0}, spec, localized(), times, o);
  CHECK(seen == std::vector<std::int64_t>{7, 14, 21, 28});
}

TEST_CASE("accumulator preconditions") {
  DistributionAccumulator acc(4);
  std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(acc.add(wrong), PreconditionError);
  const WalkSpec spec = make_spec(20, Boundary::kPeriodic, 0.1);
  const std::vector<int> bad{0, 3, 3};
  CHECK_THROWS_AS(accumulate_samples({1, 2, 0}, spec, localized(), bad), PreconditionError);
  const std::vector<int> ok{0, 1};
  CHECK_THROWS_AS(accumulate_samples({1, 0, 0}, spec, localized(), ok), PreconditionError);
}

TEST_CASE("welford statistics against a two-pass oracle") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(0.3, 2.0);
  const int n = 200;
  std::vector<double> xs(n);
  DistributionAccumulator acc(1);
  for (int i = 0; i < n; ++i) {
    xs[i] = nd(gen);
    acc.add(std::span<const double>(&xs[i], 1));
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  CHECK(acc.mean()[0] == doctest::Approx(mean).epsilon(1e-12));
  CHECK(acc.std_error()[0] == doctest::Approx(std::sqrt(ss / (n - 1) / n)).epsilon(1e-12));
}

TEST_CASE("initial polarization and staggering") {
  const WalkSpec spec = make_spec(80, Boundary::kPeriodic, M_PI / 8);
  const auto times = range_times(6);
  const auto rec = accumulate_distribution({4, 3, 0}, spec, delocalized(20, 0.0), times);
  const auto s = polarization_series(rec);
  CHECK(s.dP[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_FALSE(s.staggered);
  CHECK(polarization_series(accumulate_distribution({4, 3, 0}, spec, delocalized(20, M_PI / 2), times))
            .staggered);

  // Equal mix of |right> and |left> (pure |up>) has no polarization.
  WalkerState up(8);
  up.up(4) = 1.0;
  const auto p = spin_resolved_probability(up);
  double d = 0.0;
  for (int q = 0; q < 8; ++q) d += p.right[static_cast<std::size_t>(q)] - p.left[static_cast<std::size_t>(q)];
  CHECK(std::abs(d) < 1e-15);

  PolarizationSeries alt;
  alt.times = {4, 5, 6, 7, 8};
  alt.dP = {0.5, -0.4, 0.3, 0.2, -0.1};
  const auto m = staggering_metric(alt, 5, 8);
  CHECK(m.s == std::vector<double>{0.5, 0.4, 0.3, -0.2, -0.1});
  CHECK(m.n_window == 4);
  CHECK(m.positive_fraction == doctest::Approx(0.5));
}

TEST_CASE("clean walk spreads ballistically") {
  const WalkSpec spec = make_spec(100, Boundary::kPeriodic, 0.0);
  const auto times = range_times(20);
  const auto rec = accumulate_distribution({1, 1, 0}, spec, localized(), times);
  const auto d = mean_displacement(rec);
  CHECK(d[0] == 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(d[i] == doctest::Approx(times[i]).epsilon(1e-12));
}

TEST_CASE("relative coordinates") {
  DistributionRecord r;
  r.spec = make_spec(10, Boundary::kPeriodic, 0.0);
  r.origin = 4;
  CHECK(r.relative_q(4) == 0);
  CHECK(r.relative_q(9) == 5);
  CHECK(r.relative_q(0) == -4);
  CHECK(r.relative_q(3) == -1);
  r.spec.boundary = Boundary::kOpen;
  CHECK(r.relative_q(9) == 5);
  CHECK(r.relative_q(0) == -4);
}

TEST_CASE("exponential fits") {
  std::vector<double> d, p;
  for (int i = 0; i <= 30; ++i) {
    d.push_back(i);
    p.push_back(0.2 * std::exp(-i / 3.0));
  }
  const auto exact = fit_exponential_tail(d, p);
  CHECK(exact.xi == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(exact.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact.n_points == 31);

  std::mt19937_64 gen(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> noisy;
  for (std::size_t i = 0; i < p.size(); ++i) noisy.push_back(p[i] * (1.0 + noise(gen)));
  const auto fit = fit_exponential_tail(d, noisy);
  CHECK(std::abs(fit.xi - 3.0) < 0.15);
  CHECK(fit.ci_low < fit.xi);
  CHECK(fit.ci_high > fit.xi);

  const std::vector<double> flat(d.size(), 0.1);
  CHECK_THROWS_AS(fit_exponential_tail(d, flat), FitError);
  const std::vector<double> two_d{1, 2}, two_p{0.1, 0.01};
  CHECK_THROWS_AS(fit_exponential_tail(two_d, two_p), FitError);
  const std::vector<double> zeros{0.0, 0.0, 0.0, 0.1};
  const std::vector<double> four{1, 2, 3, 4};
  CHECK_THROWS_AS(fit_exponential_tail(four, zeros), FitError);
}

TEST_CASE("localized tail away from criticality") {
  // chi0 = (1 - <sin theta cos phi>)/2 is far from 1/2 at (pi/2, 0).
  const WalkSpec spec = make_spec(400, Boundary::kPeriodic, M_PI / 8, M_PI / 2, 0.0);
  const std::vector<int> times{150};
  const auto rec = accumulate_distribution({17, 60, 0}, spec, localized(), times, {4});
  const auto fit = fit_localization_length(rec, 0, 4, 50);
  CHECK(fit.xi > 2.0);
  CHECK(fit.xi < 20.0);
  CHECK(fit.r_squared > 0.9);
  double p_near = 0.0, p_far = 0.0;
  for (int q = 0; q < 400; ++q) {
    const int r = std::abs(rec.relative_q(q));
    const double p = rec.P(0, q, 0) + rec.P(0, q, 1);
    if (r == 0) p_near = p;
    if (r == 50) p_far = p;
  }
  CHECK(p_near / p_far > 1e3);
}

TEST_CASE("pearson correlation") {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{1, 3, 2, 4}, w{4, 3, 2, 1};
  CHECK(pearson_correlation(x, y) == doctest::Approx(1.0));
  CHECK(pearson_correlation(x, z) == doctest::Approx(0.8));
  CHECK(pearson_correlation(x, w) == doctest::Approx(-1.0));
  const std::vector<double> one{1};
  CHECK_THROWS_AS(pearson_correlation(one, one), PreconditionError);
}

}  // TEST_SUITE
