#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "qwalk/disorder.hpp"

using namespace qwalk;

TEST_SUITE("disorder") {

TEST_CASE("xoshiro256** known answers") {
  // Reference values from an independent implementation of splitmix64 +
  // xoshiro256** (seed 42).
  Xoshiro256ss rng(42);
  CHECK(rng.next() == 0x15780b2e0c2ec716ULL);
  CHECK(rng.next() == 0x6104d9866d113a7eULL);
  CHECK(rng.next() == 0xae17533239e499a1ULL);
  CHECK(rng.next() == 0xecb8ad4703b360a1ULL);
  Xoshiro256ss u(42);
  CHECK(u.uniform() == 0.08386297105988216);
  CHECK(derive_seed(12345, 7) == 0xba27aa8f508eba7bULL);
}

TEST_CASE("zero width gives constant arrays") {
  WalkSpec s;
  s.n_sites = 50;
  s.theta_mean = 0.7;
  s.phi_mean = -1.1;
  const AngleField f = sample_realization(s, 1);
  for (int q = 0; q < 50; ++q) {
    CHECK(f.theta[q] == 0.7);
    CHECK(f.phi[q] == -1.1);
    CHECK(f.theta_pre[q] == 0.7);
  }
}

TEST_CASE("sampling is deterministic in (spec, seed)") {
  WalkSpec s;
  s.n_sites = 200;
  s.theta_halfwidth = 0.5;
  s.phi_halfwidth = 1.5;
  const AngleField a = sample_realization(s, 77), b = sample_realization(s, 77);
  CHECK(a.theta == b.theta);
  CHECK(a.phi == b.phi);
  CHECK(a.spec_digest == b.spec_digest);
  CHECK(a.seed == 77);
  CHECK(sample_realization(s, 78).theta != a.theta);
}

TEST_CASE("uniform moments") {
  WalkSpec s;
  s.n_sites = 10000;
  s.theta_halfwidth = M_PI / 8;
  const AngleField f = sample_realization(s, 2024);
  double mean = 0.0;
  for (double v : f.theta) mean += v;
  mean /= s.n_sites;
  double var = 0.0;
  for (double v : f.theta) var += (v - mean) * (v - mean);
  var /= s.n_sites - 1;
  const double expected = (M_PI / 8) * (M_PI / 8) / 3.0;
  CHECK(std::abs(mean) < 5e-3);
  CHECK(std::abs(var / expected - 1.0) < 0.05);
}

TEST_CASE("interval containment over random specs") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> mean(-M_PI + 1e-9, M_PI), width(0.0, M_PI);
  for (int trial = 0; trial < 200; ++trial) {
    WalkSpec s;
    s.n_sites = 64;
    s.theta_mean = mean(gen);
    s.phi_mean = mean(gen);
    s.theta_halfwidth = width(gen);
    s.phi_halfwidth = width(gen);
    s.chiral_constraint = trial % 2 == 0;
    const AngleField f = sample_realization(s, gen());
    for (int q = 0; q < 64; ++q) {
      CHECK(std::abs(f.theta[q] - s.theta_mean) <= s.theta_halfwidth);
      CHECK(std::abs(f.theta_pre[q] - s.theta_mean) <= s.theta_halfwidth);
      CHECK(std::abs(f.phi[q] - s.phi_mean) <= s.phi_halfwidth);
    }
    if (s.chiral_constraint) CHECK(f.theta_pre == f.theta);
    else CHECK(f.theta_pre != f.theta);
  }
}

TEST_CASE("draw order: theta then phi per site") {
  WalkSpec s;
  s.n_sites = 3;
  s.theta_halfwidth = 1.0;
  s.phi_halfwidth = 2.0;
  Xoshiro256ss rng(11);
  const AngleField f = sample_realization(s, 11);
  for (int q = 0; q < 3; ++q) {
    CHECK(f.theta[q] == 1.0 * (2.0 * rng.uniform() - 1.0));
    CHECK(f.phi[q] == 2.0 * (2.0 * rng.uniform() - 1.0));
  }
}

TEST_CASE("derived seeds are collision free over 1e6 indices") {
  std::vector<std::uint64_t> seeds(1'000'000);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(20240611, i);
  CHECK(derive_seed(20240611, 5) == seeds[5]);
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("changing the master seed changes every derived seed") {
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(derive_seed(1, i) != derive_seed(2, i));
}

TEST_CASE("spec digest tracks the spec") {
  WalkSpec a;
  a.n_sites = 10;
  WalkSpec b = a;
  CHECK(spec_digest(a) == spec_digest(b));
  b.phi_halfwidth = 1e-12;
  CHECK(spec_digest(a) != spec_digest(b));
  b = a;
  b.chiral_constraint = false;
  CHECK(spec_digest(a) != spec_digest(b));
}

}  // TEST_SUITE
