#pragma once

#include <complex>
#include <string_view>

namespace qwalk::analytic {

// sigma * sigma' = +1 (aligned) or -1 (anti-aligned) relative to sigma_2.
enum class Alignment { kAligned = 1, kAntiAligned = -1 };

inline int sign(Alignment a) { return static_cast<int>(a); }

// xi_t = (2/pi^2) ln^2 t. Requires t > 1.
double xi_t(double t);

// F(x) = sum_{n>=1} (sigma sigma')^{n+1} n^2 exp(-n^2 x), x > 0.
//
// n_terms == 0 sums until the remaining tail is below 1e-17 of the leading
// term. An explicit n_terms throws PreconditionError if the first omitted
// term exceeds 1e-12 of the leading one.
double scaling_function(double x, Alignment alignment, int n_terms = 0);

// Distance used for site q on the lattice: |q|, except that the origin is
// evaluated half a lattice spacing out (the continuum series diverges at 0).
double effective_distance(long q);

// Lattice normalization C(t): the sum over q in Z and all four (sigma', sigma)
// channels of C(t) F(effective_distance(q)/xi_t) equals 1/(4 ln^2 t).
double critical_normalization(double t);

// Critical (Sinai) distribution P^chiral_{sigma' sigma}(t, q).
double critical_distribution(double t, long q, Alignment alignment);

// Delta P(t, q): aligned minus anti-aligned critical distribution.
double critical_polarization(double t, long q);

// ---- Frequency domain ----------------------------------------------------

enum class MatrixElementForm { kAsymptotic, kFull };

// epsilon_{n,0} = pi^2 (n+1)^2 / (4 ln^2 eta).
double transfer_spectrum(int n, double eta);

// k_n = pi (n+1) / (2 ln(1/eta)).
double transfer_momentum(int n, double eta);

// M_n^{sigma' sigma} for the aligned (+) or anti-aligned (-) channel.
double matrix_element(int n, double eta, Alignment alignment, MatrixElementForm form);

// P^chiral(eta, q) = eta sum_n M_n exp(-2 |q| epsilon_n). Requires
// 0 < eta < 0.1 and q >= 0 (q > 0 for the asymptotic form, whose series
// does not converge at the origin).
double frequency_propagator(double eta, double q, Alignment alignment,
                            MatrixElementForm form = MatrixElementForm::kFull);

// sum over the four channels of the integral over q in R, mode by mode:
// 4 eta sum_{n even} M_n^{++} / epsilon_n (full matrix elements).
double integrated_frequency_propagator(double eta);

// ---- Topological angle -----------------------------------------------------

// <sin theta cos phi> for independent uniform angles.
double mean_sin_cos(double theta_mean, double phi_mean, double theta_halfwidth,
                    double phi_halfwidth);

// chi^eps = (1 - exp(i eps) <sin theta cos phi>) / 2 for eps in {0, pi}.
std::complex<double> topological_angle(double theta_mean, double phi_mean,
                                       double theta_halfwidth, double phi_halfwidth,
                                       double quasi_energy);

enum class Phase { kCritical, kTopological0, kTopological1 };

std::string_view to_string(Phase p);

inline constexpr double kBareConductance = 0.25;

Phase classify_phase(double chi0, double tolerance = 1e-9);

}  // namespace qwalk::analytic
