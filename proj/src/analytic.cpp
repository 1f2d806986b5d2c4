#include "qwalk/analytic.hpp"

#include <cmath>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk::analytic {

namespace {

constexpr double kPi2 = M_PI * M_PI;
constexpr double kSeriesTolerance = 1e-17;
constexpr int kMaxTerms = 10'000'000;

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 0.1)) {
    throw PreconditionError("eta must lie in (0, 0.1) for the asymptotic propagator, got " +
                            std::to_string(eta));
  }
}

// k^3 cosh(pi k) / sinh^3(pi k), written in exp(-2 pi k) so it neither
// overflows at large k nor cancels at small k.
double mode_profile(double k) {
  const double u = std::exp(-2.0 * M_PI * k);
  const double one_minus_u = -std::expm1(-2.0 * M_PI * k);
  return 4.0 * k * k * k * u * (1.0 + u) / (one_minus_u * one_minus_u * one_minus_u);
}

}  // namespace

double xi_t(double t) {
  if (!(t > 1.0)) throw PreconditionError("xi_t needs t > 1, got " + std::to_string(t));
  const double l = std::log(t);
  return 2.0 / kPi2 * l * l;
}

double scaling_function(double x, Alignment alignment, int n_terms) {
  if (!(x > 0.0)) throw PreconditionError("scaling function needs x > 0");
  if (n_terms < 0) throw PreconditionError("n_terms must be >= 0");
  const double s = sign(alignment);
  const double peak = 1.0 / std::sqrt(x);  // n^2 exp(-n^2 x) decreases beyond n = 1/sqrt(x)

  if (n_terms > 0) {
    double sum = 0.0;
    for (int n = 1; n <= n_terms; ++n) {
      const double nn = static_cast<double>(n) * n;
      sum += ((n + 1) % 2 == 0 ? 1.0 : s) * nn * std::exp(-nn * x);
    }
    const double next_n = n_terms + 1.0;
    const double next = next_n * next_n * std::exp(-next_n * next_n * x);
    if (next_n <= peak || next > 1e-12 * std::exp(-x)) {
      throw PreconditionError("series truncated at " + std::to_string(n_terms) +
                              " terms leaves a tail above 1e-12 of the leading term");
    }
    return sum;
  }

  double sum = 0.0, abs_sum = 0.0;
  for (int n = 1; n <= kMaxTerms; ++n) {
    const double nn = static_cast<double>(n) * n;
    const double term = nn * std::exp(-nn * x);
    sum += ((n + 1) % 2 == 0 ? 1.0 : s) * term;
    abs_sum += term;
    if (n > peak) {
      const double ratio = (nn + 2.0 * n + 1.0) / nn * std::exp(-(2.0 * n + 1.0) * x);
      if (ratio < 1.0 && term * ratio / (1.0 - ratio) <= kSeriesTolerance * abs_sum) {
        return sum;
      }
    }
  }
  throw ConvergenceError("scaling series did not converge at x = " + std::to_string(x));
}

double effective_distance(long q) {
  return q == 0 ? 0.5 : static_cast<double>(q < 0 ? -q : q);
}

double critical_normalization(double t) {
  const double xi = xi_t(t);
  const double x0 = effective_distance(0) / xi;
  // Aligned + anti-aligned keeps odd n only; the q != 0 sites sum as a
  // geometric series per mode.
  double sum = 0.0;
  for (int n = 1; n <= kMaxTerms; n += 2) {
    const double nn = static_cast<double>(n) * n;
    const double term = 4.0 * nn * (std::exp(-nn * x0) + 2.0 / std::expm1(nn / xi));
    sum += term;
    if (nn * x0 > 1.0 && term <= kSeriesTolerance * sum) break;
  }
  const double l = std::log(t);
  return 1.0 / (4.0 * l * l * sum);
}

double critical_distribution(double t, long q, Alignment alignment) {
  return critical_normalization(t) *
         scaling_function(effective_distance(q) / xi_t(t), alignment);
}

double critical_polarization(double t, long q) {
  const double x = effective_distance(q) / xi_t(t);
  return critical_normalization(t) * (scaling_function(x, Alignment::kAligned) -
                                      scaling_function(x, Alignment::kAntiAligned));
}

double transfer_spectrum(int n, double eta) {
  check_eta(eta);
  const double l = std::log(eta);
  const double m = n + 1.0;
  return kPi2 * m * m / (4.0 * l * l);
}

double transfer_momentum(int n, double eta) {
  check_eta(eta);
  return M_PI * (n + 1.0) / (2.0 * std::log(1.0 / eta));
}

double matrix_element(int n, double eta, Alignment alignment, MatrixElementForm form) {
  check_eta(eta);
  if (n < 0) throw PreconditionError("mode index must be >= 0");
  const double parity = (n % 2 == 0) ? 1.0 : static_cast<double>(sign(alignment));
  const double big_l = std::log(1.0 / eta);
  if (form == MatrixElementForm::kAsymptotic) {
    const double m = n + 1.0;
    // Small-k limit of the full form below.
    return parity * kPi2 / 16.0 * m * m / (eta * eta * std::pow(big_l, 5));
  }
  const double k = transfer_momentum(n, eta);
  const double dk_dn = M_PI / (2.0 * big_l);
  return parity * kPi2 / 2.0 * k * k / (eta * eta * big_l * big_l) * dk_dn * mode_profile(k);
}

double frequency_propagator(double eta, double q, Alignment alignment,
                            MatrixElementForm form) {
  check_eta(eta);
  if (!(q >= 0.0)) throw PreconditionError("q must be >= 0");
  if (form == MatrixElementForm::kAsymptotic && q == 0.0) {
    throw PreconditionError("asymptotic matrix elements do not converge at q = 0");
  }
  double sum = 0.0, abs_sum = 0.0;
  double previous = INFINITY;
  for (int n = 0; n < kMaxTerms; ++n) {
    const double term = matrix_element(n, eta, alignment, form) *
                        std::exp(-2.0 * q * transfer_spectrum(n, eta));
    sum += term;
    abs_sum += std::abs(term);
    const bool decreasing = std::abs(term) <= previous;
    previous = std::abs(term);
    if (n > 2 && decreasing && std::abs(term) <= kSeriesTolerance * abs_sum) {
      return eta * sum;
    }
  }
  throw ConvergenceError("frequency propagator series did not converge");
}

double integrated_frequency_propagator(double eta) {
  check_eta(eta);
  double sum = 0.0;
  for (int n = 0; n < kMaxTerms; n += 2) {
    const double term = matrix_element(n, eta, Alignment::kAligned, MatrixElementForm::kFull) /
                        transfer_spectrum(n, eta);
    sum += term;
    if (transfer_momentum(n, eta) > 1.0 && term <= kSeriesTolerance * sum) break;
  }
  return 4.0 * eta * sum;
}

double mean_sin_cos(double theta_mean, double phi_mean, double theta_halfwidth,
                    double phi_halfwidth) {
  auto sinc = [](double w) { return w == 0.0 ? 1.0 : std::sin(w) / w; };
  return std::sin(theta_mean) * std::cos(phi_mean) * sinc(theta_halfwidth) *
         sinc(phi_halfwidth);
}

std::complex<double> topological_angle(double theta_mean, double phi_mean,
                                       double theta_halfwidth, double phi_halfwidth,
                                       double quasi_energy) {
  const double m = mean_sin_cos(theta_mean, phi_mean, theta_halfwidth, phi_halfwidth);
  std::complex<double> phase;
  if (quasi_energy == 0.0) {
    phase = 1.0;
  } else if (quasi_energy == M_PI || quasi_energy == -M_PI) {
    phase = -1.0;
  } else {
    phase = std::polar(1.0, quasi_energy);
  }
  return 0.5 * (1.0 - phase * m);
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kCritical:
      return "critical";
    case Phase::kTopological0:
      return "topological_0";
    case Phase::kTopological1:
      return "topological_1";
  }
  return "unknown";
}

Phase classify_phase(double chi0, double tolerance) {
  if (std::abs(chi0 - 0.5) < tolerance) return Phase::kCritical;
  return chi0 < 0.5 ? Phase::kTopological0 : Phase::kTopological1;
}

}  // namespace qwalk::analytic
