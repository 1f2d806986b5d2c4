#pragma once

#include <cstdint>
#include <vector>

#include "qwalk/walk_spec.hpp"

namespace qwalk {

// One frozen disorder realization.
//
// theta is the coin angle applied after the shift, theta_pre (vartheta) the
// one applied before it. Under the chiral constraint both arrays are equal.
struct AngleField {
  std::vector<double> theta;
  std::vector<double> theta_pre;
  std::vector<double> phi;
  std::uint64_t seed = 0;
  std::uint64_t spec_digest = 0;

  int n_sites() const { return static_cast<int>(theta.size()); }
};

struct EnsemblePlan {
  std::uint64_t master_seed = 0;
  std::int64_t n_realizations = 1;
  // Realizations first_index .. first_index + n_realizations - 1.
  std::int64_t first_index = 0;

  bool operator==(const EnsemblePlan&) const = default;
};

// xoshiro256** (Blackman & Vigna), state filled from splitmix64(seed).
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed);

  std::uint64_t next();
  // Uniform on [0, 1) from the top 53 bits.
  double uniform();

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

// MurmurHash3 64-bit finalizer. A bijection on 64-bit words.
std::uint64_t fmix64(std::uint64_t x);

// Seed of realization `index`: fmix64(master ^ (index * 0x9E3779B97F4A7C15)).
// Injective in index for a fixed master, and in master for a fixed index.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

// FNV-1a over the exact (hex-float) text form of the spec.
std::uint64_t spec_digest(const WalkSpec& spec);

// Draws per site, ascending q: theta_q, then phi_q, then vartheta_q when the
// chiral constraint is off. Pure in (spec, seed).
AngleField sample_realization(const WalkSpec& spec, std::uint64_t seed);

// Same spec with every site at the mean angles (no RNG involved).
AngleField clean_realization(const WalkSpec& spec);

}  // namespace qwalk
