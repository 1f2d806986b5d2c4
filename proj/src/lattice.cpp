#include "qwalk/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qwalk/errors.hpp"

namespace qwalk {

std::string_view to_string(Boundary b) {
  return b == Boundary::kPeriodic ? "periodic" : "open";
}

Boundary parse_boundary(std::string_view text) {
  if (text == "periodic") return Boundary::kPeriodic;
  if (text == "open") return Boundary::kOpen;
  throw PreconditionError("unknown boundary '" + std::string(text) +
                          "' (expected periodic or open)");
}

void WalkSpec::validate() const {
  if (n_sites < 2) {
    throw PreconditionError("n_sites must be >= 2, got " + std::to_string(n_sites));
  }
  auto check_halfwidth = [](double w, const char* name) {
    if (!(w >= 0.0 && w <= M_PI)) {
      throw PreconditionError(std::string(name) + " must lie in [0, pi]");
    }
  };
  auto check_mean = [](double m, const char* name) {
    if (!(m > -M_PI && m <= M_PI)) {
      throw PreconditionError(std::string(name) + " must lie in (-pi, pi]");
    }
  };
  check_halfwidth(theta_halfwidth, "theta_halfwidth");
  check_halfwidth(phi_halfwidth, "phi_halfwidth");
  check_mean(theta_mean, "theta_mean");
  check_mean(phi_mean, "phi_mean");
}

int lattice_center(int n_sites) { return (n_sites / 2) & ~1; }

namespace spin_basis {

Spinor chiral_eigenvector(Chirality c) {
  const double sign = c == Chirality::kRight ? 1.0 : -1.0;
  return {Complex(kInvSqrt2, 0.0), Complex(0.0, sign * kInvSqrt2)};
}

Spinor sigma1(const Spinor& s) { return {s.down, s.up}; }

Spinor sigma2(const Spinor& s) {
  // [[0, -i], [i, 0]]
  return {Complex(s.down.imag(), -s.down.real()), Complex(-s.up.imag(), s.up.real())};
}

Spinor sigma3(const Spinor& s) { return {s.up, -s.down}; }

}  // namespace spin_basis

WalkerState::WalkerState(int n_sites) : n_sites_(n_sites) {
  if (n_sites < 2) {
    throw PreconditionError("WalkerState needs n_sites >= 2, got " +
                            std::to_string(n_sites));
  }
  amp_.assign(2 * static_cast<std::size_t>(n_sites), Complex(0.0, 0.0));
}

double WalkerState::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amp_) sum += std::norm(a);
  return sum;
}

WalkerState make_localized_state(const WalkSpec& spec, int q0, Chirality chirality) {
  spec.validate();
  if (q0 < 0 || q0 >= spec.n_sites) {
    throw PreconditionError("site " + std::to_string(q0) + " outside 0.." +
                            std::to_string(spec.n_sites - 1));
  }
  WalkerState state(spec.n_sites);
  const Spinor s = spin_basis::chiral_eigenvector(chirality);
  state.up(q0) = s.up;
  state.down(q0) = s.down;
  return state;
}

WalkerState make_delocalized_state(const WalkSpec& spec, int M, double p0,
                                   int planned_steps) {
  spec.validate();
  if (M < 0 || M % 2 != 0) {
    throw PreconditionError("M must be a non-negative even integer, got " +
                            std::to_string(M));
  }
  if (planned_steps < 0) throw PreconditionError("planned_steps must be >= 0");
  const int center = lattice_center(spec.n_sites);
  const int reach = spec.boundary == Boundary::kOpen ? M + planned_steps + 1 : M;
  if (center - reach < 0 || center + reach > spec.n_sites - 1 ||
      (spec.boundary == Boundary::kPeriodic && 2 * M + 1 > spec.n_sites)) {
    throw PreconditionError("lattice of " + std::to_string(spec.n_sites) +
                            " sites too small for M=" + std::to_string(M) +
                            " and " + std::to_string(planned_steps) + " steps");
  }

  WalkerState state(spec.n_sites);
  const Spinor right = spin_basis::chiral_eigenvector(Chirality::kRight);
  const double norm = 1.0 / std::sqrt(static_cast<double>(M + 1));
  for (int k = -M / 2; k <= M / 2; ++k) {
    const Complex a = norm * std::polar(1.0, 2.0 * k * p0);
    const int q = center + 2 * k;
    state.up(q) = a * right.up;
    state.down(q) = a * right.down;
  }
  return state;
}

FloquetStepper::FloquetStepper(const AngleField& angles, const WalkSpec& spec,
                               EdgePolicy policy)
    : n_sites_(spec.n_sites), boundary_(spec.boundary), policy_(policy) {
  if (angles.n_sites() != spec.n_sites ||
      angles.theta_pre.size() != angles.theta.size() ||
      angles.phi.size() != angles.theta.size()) {
    throw PreconditionError("angle field size does not match n_sites");
  }
  coeff_.resize(static_cast<std::size_t>(n_sites_));
  for (int q = 0; q < n_sites_; ++q) {
    auto& c = coeff_[static_cast<std::size_t>(q)];
    c.phase_re = std::cos(0.5 * angles.phi[q]);
    c.phase_im = std::sin(0.5 * angles.phi[q]);
    c.cos_pre = std::cos(0.5 * angles.theta_pre[q]);
    c.sin_pre = std::sin(0.5 * angles.theta_pre[q]);
    c.cos_post = std::cos(0.5 * angles.theta[q]);
    c.sin_post = std::sin(0.5 * angles.theta[q]);
  }
  scratch_.resize(2 * static_cast<std::size_t>(n_sites_));
}

namespace {

// (u, d) <- exp(i a sigma_1) (u, d) with c = cos a, s = sin a.
inline void rotate_x(double c, double s, double& ur, double& ui, double& dr,
                     double& di) {
  const double nur = c * ur - s * di;
  const double nui = c * ui + s * dr;
  const double ndr = c * dr - s * ui;
  const double ndi = c * di + s * ur;
  ur = nur;
  ui = nui;
  dr = ndr;
  di = ndi;
}

// (u, d) <- exp(i a sigma_3) (u, d) with exp(i a) = (pr, pi).
inline void rotate_z(double pr, double pi, double& ur, double& ui, double& dr,
                     double& di) {
  const double nur = pr * ur - pi * ui;
  const double nui = pr * ui + pi * ur;
  const double ndr = pr * dr + pi * di;
  const double ndi = pr * di - pi * dr;
  ur = nur;
  ui = nui;
  dr = ndr;
  di = ndi;
}

}  // namespace

void FloquetStepper::step(WalkerState& state) {
  if (state.n_sites() != n_sites_) {
    throw PreconditionError("state size does not match stepper");
  }
  const int n = n_sites_;
  const bool open = boundary_ == Boundary::kOpen;
  if (open && policy_ == EdgePolicy::kThrow) {
    for (int q : {0, n - 1}) {
      if (std::abs(state.up(q)) > kEdgeTolerance ||
          std::abs(state.down(q)) > kEdgeTolerance) {
        throw LatticeOverflowError("amplitude reached edge site " + std::to_string(q) +
                                   " of an open lattice with " + std::to_string(n) +
                                   " sites");
      }
    }
  }

  auto* amp = reinterpret_cast<double*>(state.amplitudes().data());
  auto* tmp = reinterpret_cast<double*>(scratch_.data());

  // Pre-shift rotations, amplitude stays on its site.
  for (int q = 0; q < n; ++q) {
    const auto& c = coeff_[static_cast<std::size_t>(q)];
    double* a = amp + 4 * q;
    double ur = a[0], ui = a[1], dr = a[2], di = a[3];
    rotate_z(c.phase_re, c.phase_im, ur, ui, dr, di);
    rotate_x(c.cos_pre, c.sin_pre, ur, ui, dr, di);
    double* b = tmp + 4 * q;
    b[0] = ur;
    b[1] = ui;
    b[2] = dr;
    b[3] = di;
  }

  // Shift (up -> q+1, down -> q-1), then post-shift rotations at the
  // destination site.
  for (int q = 0; q < n; ++q) {
    int from_up = q - 1;
    int from_down = q + 1;
    if (!open) {
      if (from_up < 0) from_up += n;
      if (from_down >= n) from_down -= n;
    }
    double ur = 0.0, ui = 0.0, dr = 0.0, di = 0.0;
    if (from_up >= 0) {
      ur = tmp[4 * from_up];
      ui = tmp[4 * from_up + 1];
    }
    if (from_down < n) {
      dr = tmp[4 * from_down + 2];
      di = tmp[4 * from_down + 3];
    }
    const auto& c = coeff_[static_cast<std::size_t>(q)];
    rotate_x(c.cos_post, c.sin_post, ur, ui, dr, di);
    rotate_z(c.phase_re, c.phase_im, ur, ui, dr, di);
    double* a = amp + 4 * q;
    a[0] = ur;
    a[1] = ui;
    a[2] = dr;
    a[3] = di;
  }
}

WalkerState apply_step(const WalkerState& state, const AngleField& angles,
                       const WalkSpec& spec) {
  FloquetStepper stepper(angles, spec);
  WalkerState out = state;
  stepper.step(out);
  return out;
}

void evolve_visit(const WalkerState& initial, FloquetStepper& stepper,
                  std::span<const int> times,
                  const std::function<void(int, const WalkerState&)>& visit) {
  if (times.empty()) return;
  std::vector<int> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0) throw PreconditionError("observation times must be >= 0");
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  WalkerState state = initial;
  int t = 0;
  for (int target : sorted) {
    while (t < target) {
      stepper.step(state);
      ++t;
    }
    visit(t, state);
  }
}

std::vector<WalkerState> evolve(const WalkerState& initial, const AngleField& angles,
                                const WalkSpec& spec, int t_max,
                                std::span<const int> record) {
  if (t_max < 0) throw PreconditionError("t_max must be >= 0");
  for (int t : record) {
    if (t < 0 || t > t_max) {
      throw PreconditionError("observation time " + std::to_string(t) +
                              " outside 0..t_max");
    }
  }
  FloquetStepper stepper(angles, spec);
  std::vector<int> sorted(record.begin(), record.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<WalkerState> at_time;
  at_time.reserve(sorted.size());
  evolve_visit(initial, stepper, sorted,
               [&](int, const WalkerState& s) { at_time.push_back(s); });

  std::vector<WalkerState> out;
  out.reserve(record.size());
  for (int t : record) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
    out.push_back(at_time[static_cast<std::size_t>(it - sorted.begin())]);
  }
  return out;
}

Eigen::MatrixXcd build_floquet_matrix(const AngleField& angles, const WalkSpec& spec) {
  spec.validate();
  FloquetStepper stepper(angles, spec, EdgePolicy::kTruncate);
  const int dim = 2 * spec.n_sites;
  Eigen::MatrixXcd u(dim, dim);
  WalkerState basis(spec.n_sites);
  for (int j = 0; j < dim; ++j) {
    std::fill(basis.amplitudes().begin(), basis.amplitudes().end(), Complex(0.0, 0.0));
    basis.amplitudes()[static_cast<std::size_t>(j)] = Complex(1.0, 0.0);
    stepper.step(basis);
    for (int i = 0; i < dim; ++i) u(i, j) = basis.amplitudes()[static_cast<std::size_t>(i)];
  }
  return u;
}

}  // namespace qwalk
