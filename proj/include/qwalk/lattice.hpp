#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/disorder.hpp"
#include "qwalk/walk_spec.hpp"

namespace qwalk {

using Complex = std::complex<double>;

enum class Spin { kUp = 0, kDown = 1 };

// Eigenstates of sigma_2: |right> = (|up> + i|down>)/sqrt(2) has eigenvalue +1,
// |left> = (|up> - i|down>)/sqrt(2) has eigenvalue -1.
enum class Chirality { kRight, kLeft };

struct Spinor {
  Complex up;
  Complex down;
};

namespace spin_basis {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

Spinor chiral_eigenvector(Chirality c);

// Pauli matrices acting on a spinor in the {up, down} basis.
Spinor sigma1(const Spinor& s);
Spinor sigma2(const Spinor& s);
Spinor sigma3(const Spinor& s);

}  // namespace spin_basis

// Wavefunction over (site, spin). Amplitudes are stored spin-major per site:
// index 2*q + 0 is |q, up>, 2*q + 1 is |q, down>.
class WalkerState {
 public:
  explicit WalkerState(int n_sites);

  int n_sites() const { return n_sites_; }

  Complex& up(int q) { return amp_[2 * static_cast<std::size_t>(q)]; }
  Complex& down(int q) { return amp_[2 * static_cast<std::size_t>(q) + 1]; }
  const Complex& up(int q) const { return amp_[2 * static_cast<std::size_t>(q)]; }
  const Complex& down(int q) const { return amp_[2 * static_cast<std::size_t>(q) + 1]; }
  Spinor spinor(int q) const { return {up(q), down(q)}; }

  std::span<Complex> amplitudes() { return amp_; }
  std::span<const Complex> amplitudes() const { return amp_; }

  double norm_squared() const;

  bool operator==(const WalkerState&) const = default;

 private:
  int n_sites_;
  std::vector<Complex> amp_;
};

WalkerState make_localized_state(const WalkSpec& spec, int q0, Chirality chirality);

// Coherent superposition over the M+1 even sites center + 2k, |k| <= M/2, with
// amplitude exp(2 i k p0)/sqrt(M+1) and spinor |right> on each. M must be even.
// For open boundaries, planned_steps is the number of steps the caller intends
// to run; the lattice must leave every edge site empty for that long.
WalkerState make_delocalized_state(const WalkSpec& spec, int M, double p0,
                                   int planned_steps = 0);

// Edge amplitude above this magnitude on an open lattice is an overflow.
inline constexpr double kEdgeTolerance = 1e-14;

enum class EdgePolicy {
  kThrow,     // open lattice: amplitude on an edge site before the shift throws
  kTruncate,  // open lattice: amplitude shifted past an edge is dropped
};

// Applies the symmetrized Floquet step
//   U = R_z(phi/2) R_x(theta/2) T R_x(vartheta/2) R_z(phi/2),  R_i(a) = exp(i a sigma_i)
// with per-site coefficients precomputed from one AngleField.
class FloquetStepper {
 public:
  FloquetStepper(const AngleField& angles, const WalkSpec& spec,
                 EdgePolicy policy = EdgePolicy::kThrow);

  int n_sites() const { return n_sites_; }

  // In place. Throws LatticeOverflowError under EdgePolicy::kThrow.
  void step(WalkerState& state);

 private:
  struct SiteCoefficients {
    double phase_re, phase_im;  // exp(i phi/2)
    double cos_pre, sin_pre;    // vartheta/2
    double cos_post, sin_post;  // theta/2
  };

  int n_sites_;
  Boundary boundary_;
  EdgePolicy policy_;
  std::vector<SiteCoefficients> coeff_;
  std::vector<Complex> scratch_;
};

WalkerState apply_step(const WalkerState& state, const AngleField& angles,
                       const WalkSpec& spec);

// Calls visit(t, state) for every t in `times` (any order, duplicates allowed)
// while stepping from 0 to max(times).
void evolve_visit(const WalkerState& initial, FloquetStepper& stepper,
                  std::span<const int> times,
                  const std::function<void(int, const WalkerState&)>& visit);

// Snapshots at each requested time, in the order requested.
std::vector<WalkerState> evolve(const WalkerState& initial, const AngleField& angles,
                                const WalkSpec& spec, int t_max,
                                std::span<const int> record);

// Dense 2N x 2N matrix of one step in the spin-major basis. Open boundaries are
// truncated at the edges (the result is then not unitary).
Eigen::MatrixXcd build_floquet_matrix(const AngleField& angles, const WalkSpec& spec);

}  // namespace qwalk
