#include "qwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include "qwalk/errors.hpp"
#include "qwalk/parallel.hpp"

namespace qwalk {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kWrapTolerance = 1e-13;
constexpr double kDegeneracyGap = 1e-9;

double unitarity_defect(const Eigen::MatrixXcd& u) {
  const Eigen::MatrixXcd d =
      u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return max_abs(d);
}

Eigen::ComplexSchur<Eigen::MatrixXcd> schur_or_throw(const Eigen::MatrixXcd& u,
                                                     bool compute_vectors) {
  if (u.rows() != u.cols() || u.rows() == 0) {
    throw PreconditionError("eigendecomposition needs a non-empty square matrix");
  }
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u, compute_vectors);
  if (schur.info() != Eigen::Success) {
    throw ConvergenceError("complex Schur iteration did not converge (dim " +
                           std::to_string(u.rows()) + ", unitarity defect " +
                           std::to_string(unitarity_defect(u)) + ")");
  }
  return schur;
}

double first_component_phase(const Eigen::MatrixXcd& v, Eigen::Index col) {
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    if (std::abs(v(i, col)) > 1e-8) return std::arg(v(i, col));
  }
  return 0.0;
}

}  // namespace

double wrap_phase(double phase) {
  double w = std::remainder(phase, kTwoPi);  // [-pi, pi]
  if (w <= -M_PI + kWrapTolerance) return M_PI;
  return w;
}

SpectrumRecord eigendecompose(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols()) throw PreconditionError("matrix must be square");
  const double defect = unitarity_defect(u);
  if (!(defect <= 1e-10)) {
    throw PreconditionError("matrix is not unitary (max |U^dagger U - 1| = " +
                            std::to_string(defect) + ")");
  }
  const auto schur = schur_or_throw(u, true);
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& q = schur.matrixU();
  const Eigen::Index dim = u.rows();

  std::vector<double> raw(static_cast<std::size_t>(dim));
  for (Eigen::Index n = 0; n < dim; ++n) raw[static_cast<std::size_t>(n)] = wrap_phase(std::arg(t(n, n)));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return raw[static_cast<std::size_t>(a)] < raw[static_cast<std::size_t>(b)];
  });

  SpectrumRecord out;
  out.eigenphases.resize(static_cast<std::size_t>(dim));
  out.eigenvectors.resize(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n) {
    out.eigenphases[static_cast<std::size_t>(n)] = raw[static_cast<std::size_t>(order[static_cast<std::size_t>(n)])];
    out.eigenvectors.col(n) = q.col(order[static_cast<std::size_t>(n)]);
  }

  // Degenerate clusters: re-orthonormalize, then order deterministically.
  Eigen::Index begin = 0;
  while (begin < dim) {
    Eigen::Index end = begin + 1;
    while (end < dim && out.eigenphases[static_cast<std::size_t>(end)] -
                                out.eigenphases[static_cast<std::size_t>(end - 1)] <=
                            kDegeneracyGap) {
      ++end;
    }
    if (end - begin > 1) {
      for (Eigen::Index c = begin; c < end; ++c) {
        for (Eigen::Index p = begin; p < c; ++p) {
          const Complex overlap = out.eigenvectors.col(p).dot(out.eigenvectors.col(c));
          out.eigenvectors.col(c) -= overlap * out.eigenvectors.col(p);
        }
        out.eigenvectors.col(c).normalize();
      }
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(end - begin));
      std::iota(idx.begin(), idx.end(), begin);
      std::vector<double> key(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) key[i] = first_component_phase(out.eigenvectors, idx[i]);
      std::vector<std::size_t> perm(idx.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        const double pa = out.eigenphases[static_cast<std::size_t>(idx[a])];
        const double pb = out.eigenphases[static_cast<std::size_t>(idx[b])];
        if (pa != pb) return pa < pb;
        return key[a] < key[b];
      });
      const Eigen::MatrixXcd block = out.eigenvectors.middleCols(begin, end - begin);
      std::vector<double> phases(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) phases[i] = out.eigenphases[static_cast<std::size_t>(idx[i])];
      for (std::size_t i = 0; i < perm.size(); ++i) {
        out.eigenvectors.col(begin + static_cast<Eigen::Index>(i)) = block.col(static_cast<Eigen::Index>(perm[i]));
        out.eigenphases[static_cast<std::size_t>(begin) + i] = phases[perm[i]];
      }
    }
    begin = end;
  }
  return out;
}

std::vector<double> eigenphases(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols() || u.rows() == 0) {
    throw PreconditionError("eigenphases need a non-empty square matrix");
  }
  // LAPACK's Schur driver is markedly faster than Eigen's for eigenvalues only.
  const auto n = static_cast<lapack_int>(u.rows());
  Eigen::MatrixXcd a = u;
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_zgees(
      LAPACK_COL_MAJOR, 'N', 'N', nullptr, n, reinterpret_cast<lapack_complex_double*>(a.data()),
      n, &sdim, reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, n);
  if (info != 0) {
    throw ConvergenceError("zgees failed with info " + std::to_string(info) + " (dim " +
                           std::to_string(n) + ")");
  }
  std::vector<double> out(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) out[k] = wrap_phase(std::arg(w[k]));
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<double, double> clean_dispersion(double theta, double phi, double p) {
  const double c2 = std::pow(std::cos(0.5 * theta), 2);
  const double s2 = std::pow(std::sin(0.5 * theta), 2);
  // |cos eps| <= c2 + s2 = 1 up to rounding.
  const double cos_eps =
      std::clamp(std::cos(phi + p) * c2 - std::cos(phi - p) * s2, -1.0, 1.0);
  const double eps = std::acos(cos_eps);
  return {eps, -eps};
}

int dos_bin_index(double phase, int n_bins) {
  const double width = kTwoPi / n_bins;
  auto k = static_cast<long>(std::floor((phase + M_PI) / width + 0.5));
  k %= n_bins;
  if (k < 0) k += n_bins;
  return static_cast<int>(k);
}

double DosHistogram::bin_width() const {
  return kTwoPi / static_cast<double>(centers.size());
}

int DosHistogram::bin_of(double phase) const {
  return dos_bin_index(phase, static_cast<int>(centers.size()));
}

double DosHistogram::density_per_energy(double phase) const {
  return density[static_cast<std::size_t>(bin_of(phase))] / bin_width();
}

double DosHistogram::median() const {
  std::vector<double> sorted = density;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

DosHistogram histogram_from_phases(const std::vector<std::vector<double>>& phases,
                                   int n_bins) {
  if (n_bins < 1) throw PreconditionError("n_bins must be >= 1");
  if (phases.empty()) throw PreconditionError("no realizations to histogram");
  const auto nb = static_cast<std::size_t>(n_bins);
  DosHistogram h;
  h.centers.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    h.centers[k] = -M_PI + static_cast<double>(k) * (kTwoPi / n_bins);
  }
  std::vector<double> mean(nb, 0.0), m2(nb, 0.0), sample(nb);
  std::int64_t count = 0;
  for (const auto& realization : phases) {
    std::fill(sample.begin(), sample.end(), 0.0);
    const double weight = 1.0 / static_cast<double>(realization.size());
    for (double e : realization) sample[static_cast<std::size_t>(dos_bin_index(e, n_bins))] += weight;
    ++count;
    for (std::size_t k = 0; k < nb; ++k) {
      const double delta = sample[k] - mean[k];
      mean[k] += delta / static_cast<double>(count);
      m2[k] += delta * (sample[k] - mean[k]);
    }
  }
  h.density = mean;
  h.std_error.assign(nb, 0.0);
  if (count > 1) {
    for (std::size_t k = 0; k < nb; ++k) {
      h.std_error[k] = std::sqrt(std::max(0.0, m2[k]) / static_cast<double>(count - 1) /
                                 static_cast<double>(count));
    }
  }
  h.n_realizations = count;
  return h;
}

DosHistogram dos_histogram(const WalkSpec& spec, int n_bins, const EnsemblePlan& plan,
                           int workers) {
  spec.validate();
  if (spec.boundary != Boundary::kPeriodic) {
    throw PreconditionError("density of states needs a periodic lattice");
  }
  if (spec.n_sites % 2 != 0) {
    throw PreconditionError("density of states needs an even number of sites");
  }
  if (plan.n_realizations < 1) throw PreconditionError("n_realizations must be >= 1");
  std::vector<std::vector<double>> phases(static_cast<std::size_t>(plan.n_realizations));
  parallel_for_index(plan.n_realizations, workers, [&](std::int64_t i) {
    const auto seed = derive_seed(plan.master_seed,
                                  static_cast<std::uint64_t>(plan.first_index + i));
    const AngleField field = sample_realization(spec, seed);
    phases[static_cast<std::size_t>(i)] = eigenphases(build_floquet_matrix(field, spec));
  });
  return histogram_from_phases(phases, n_bins);
}

Eigen::MatrixXcd resolvent(const Eigen::MatrixXcd& u, double quasi_energy,
                           PropagatorKind kind, double regulator) {
  if (u.rows() != u.cols()) throw PreconditionError("matrix must be square");
  if (!(regulator >= 0.0)) throw PreconditionError("regulator must be >= 0");
  const Complex z = std::exp(Complex(-regulator, quasi_energy));
  const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(u.rows(), u.cols()) - z * u;
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    throw PreconditionError("resolvent is singular at quasi-energy " +
                            std::to_string(quasi_energy) + " (rcond " +
                            std::to_string(rcond) + ")");
  }
  Eigen::MatrixXcd g = lu.inverse();
  if (kind == PropagatorKind::kAdvanced) return g.adjoint();
  return g;
}

Eigen::MatrixXcd sigma2_operator(int n_sites) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2 * n_sites, 2 * n_sites);
  for (int q = 0; q < n_sites; ++q) {
    s(2 * q, 2 * q + 1) = Complex(0.0, -1.0);
    s(2 * q + 1, 2 * q) = Complex(0.0, 1.0);
  }
  return s;
}

Eigen::MatrixXcd sublattice_operator(int n_sites) {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2 * n_sites, 2 * n_sites);
  for (int q = 0; q < n_sites; ++q) {
    const double sign = q % 2 == 0 ? 1.0 : -1.0;
    s(2 * q, 2 * q) = sign;
    s(2 * q + 1, 2 * q + 1) = sign;
  }
  return s;
}

Eigen::MatrixXcd chiral_sublattice_operator(int n_sites) {
  return sigma2_operator(n_sites) * sublattice_operator(n_sites);
}

double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double chiral_deviation(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols() || u.rows() % 2 != 0) {
    throw PreconditionError("expected a square matrix of even dimension");
  }
  const auto s2 = sigma2_operator(static_cast<int>(u.rows() / 2));
  return max_abs(s2 * u * s2 - u.adjoint());
}

SymmetryReport symmetry_report(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols() || u.rows() % 2 != 0) {
    throw PreconditionError("expected a square matrix of even dimension");
  }
  const int n_sites = static_cast<int>(u.rows() / 2);
  if (n_sites % 2 != 0) {
    throw PreconditionError("sublattice operator (-1)^q is ill-defined on a ring of " +
                            std::to_string(n_sites) + " sites");
  }
  const auto s = sublattice_operator(n_sites);
  const auto c = chiral_sublattice_operator(n_sites);
  const Eigen::MatrixXcd iu = Complex(0.0, 1.0) * u;
  SymmetryReport r;
  r.chiral = chiral_deviation(u);
  r.sublattice = max_abs(s * u * s + u);
  r.chiral_sublattice = max_abs(c * iu * c - iu.adjoint());
  return r;
}

std::vector<double> spectral_weights(const WalkerState& state,
                                     const SpectrumRecord& spectrum) {
  const auto amps = state.amplitudes();
  if (static_cast<Eigen::Index>(amps.size()) != spectrum.eigenvectors.rows()) {
    throw PreconditionError("state and spectrum dimensions differ");
  }
  const Eigen::Map<const Eigen::VectorXcd> psi(amps.data(),
                                                static_cast<Eigen::Index>(amps.size()));
  const Eigen::VectorXcd overlaps = spectrum.eigenvectors.adjoint() * psi;
  std::vector<double> a(static_cast<std::size_t>(overlaps.size()));
  for (Eigen::Index n = 0; n < overlaps.size(); ++n) a[static_cast<std::size_t>(n)] = std::norm(overlaps(n));
  return a;
}

}  // namespace qwalk
