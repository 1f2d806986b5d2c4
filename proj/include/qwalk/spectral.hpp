#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/disorder.hpp"
#include "qwalk/lattice.hpp"

namespace qwalk {

// Maps any angle into (-pi, pi]. Values within 1e-13 of -pi map to +pi.
double wrap_phase(double phase);

// Eigenphases sorted ascending in (-pi, pi]; eigenvectors(:, n) belongs to
// eigenphases[n] and the columns are orthonormal.
struct SpectrumRecord {
  std::vector<double> eigenphases;
  Eigen::MatrixXcd eigenvectors;
  std::uint64_t seed = 0;
};

// Full eigensystem of a unitary matrix via complex Schur decomposition.
// Throws PreconditionError if U is not unitary within 1e-10 and
// ConvergenceError if the QR iteration fails.
SpectrumRecord eigendecompose(const Eigen::MatrixXcd& u);

// Eigenphases only (sorted ascending, same conventions), no unitarity check.
std::vector<double> eigenphases(const Eigen::MatrixXcd& u);

// Clean-lattice bands: +eps and -eps with eps in [0, pi] solving
//   cos eps = cos(phi + p) cos^2(theta/2) - cos(phi - p) sin^2(theta/2).
std::pair<double, double> clean_dispersion(double theta, double phi, double p);

// Histogram of eigenphases. Bin k is centred on -pi + k * width and covers
// [center - width/2, center + width/2); bin 0 wraps across +-pi.
struct DosHistogram {
  std::vector<double> centers;
  std::vector<double> density;  // fraction of eigenphases per bin, sums to 1
  std::vector<double> std_error;  // across realizations
  std::int64_t n_realizations = 0;

  double bin_width() const;
  int bin_of(double phase) const;
  // Density per unit quasi-energy in the bin containing `phase`.
  double density_per_energy(double phase) const;
  double median() const;
};

int dos_bin_index(double phase, int n_bins);

// Pooled eigenphase histogram over an ensemble of realizations of `spec`.
// Requires periodic boundary and even n_sites.
DosHistogram dos_histogram(const WalkSpec& spec, int n_bins, const EnsemblePlan& plan,
                           int workers = 1);

// Histogram from already computed per-realization eigenphase lists.
DosHistogram histogram_from_phases(const std::vector<std::vector<double>>& phases,
                                   int n_bins);

enum class PropagatorKind { kRetarded, kAdvanced };

inline constexpr double kDefaultRegulator = 1e-6;

// G^R = [1 - exp(i eps - reg) U]^{-1}, G^A = (G^R)^dagger.
// Throws PreconditionError when the system is numerically singular.
Eigen::MatrixXcd resolvent(const Eigen::MatrixXcd& u, double quasi_energy,
                           PropagatorKind kind, double regulator = kDefaultRegulator);

// Operators in the spin-major basis.
Eigen::MatrixXcd sigma2_operator(int n_sites);
Eigen::MatrixXcd sublattice_operator(int n_sites);
Eigen::MatrixXcd chiral_sublattice_operator(int n_sites);

double max_abs(const Eigen::MatrixXcd& m);

// max |sigma_2 U sigma_2 - U^dagger|.
double chiral_deviation(const Eigen::MatrixXcd& u);

struct SymmetryReport {
  double chiral = 0.0;              // |sigma_2 U sigma_2 - U^dagger|
  double sublattice = 0.0;          // |S U S + U|
  double chiral_sublattice = 0.0;   // |C_sl (iU) C_sl - (iU)^dagger|
};

// Requires an even number of sites (PreconditionError otherwise).
SymmetryReport symmetry_report(const Eigen::MatrixXcd& u);

// a_n = |<v_n|psi>|^2.
std::vector<double> spectral_weights(const WalkerState& state,
                                     const SpectrumRecord& spectrum);

}  // namespace qwalk
