#include "qwalk/disorder.hpp"

#include <cstdio>
#include <string>

namespace qwalk {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGoldenGamma);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Xoshiro256ss::Xoshiro256ss(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Xoshiro256ss::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256ss::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return fmix64(master_seed ^ (index * kGoldenGamma));
}

std::uint64_t spec_digest(const WalkSpec& spec) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "n_sites=%d;boundary=%s;theta_mean=%a;phi_mean=%a;"
                "theta_halfwidth=%a;phi_halfwidth=%a;chiral=%d",
                spec.n_sites, std::string(to_string(spec.boundary)).c_str(),
                spec.theta_mean, spec.phi_mean, spec.theta_halfwidth,
                spec.phi_halfwidth, spec.chiral_constraint ? 1 : 0);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char* p = buf; *p != '\0'; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001B3ULL;
  }
  return h;
}

AngleField sample_realization(const WalkSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n_sites);
  AngleField field;
  field.theta.resize(n);
  field.theta_pre.resize(n);
  field.phi.resize(n);
  field.seed = seed;
  field.spec_digest = spec_digest(spec);

  Xoshiro256ss rng(seed);
  auto draw = [&rng](double mean, double halfwidth) {
    return mean + halfwidth * (2.0 * rng.uniform() - 1.0);
  };
  for (std::size_t q = 0; q < n; ++q) {
    field.theta[q] = draw(spec.theta_mean, spec.theta_halfwidth);
    field.phi[q] = draw(spec.phi_mean, spec.phi_halfwidth);
    field.theta_pre[q] = spec.chiral_constraint
                             ? field.theta[q]
                             : draw(spec.theta_mean, spec.theta_halfwidth);
  }
  return field;
}

AngleField clean_realization(const WalkSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.n_sites);
  AngleField field;
  field.theta.assign(n, spec.theta_mean);
  field.theta_pre.assign(n, spec.theta_mean);
  field.phi.assign(n, spec.phi_mean);
  field.spec_digest = spec_digest(spec);
  return field;
}

}  // namespace qwalk
