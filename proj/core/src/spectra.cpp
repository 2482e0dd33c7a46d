#include "qtherm/spectra.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qtherm {

namespace {

void check_hermitian(const Mat& A) {
  if (A.rows() != A.cols()) throw std::domain_error("diagonalize: matrix not square");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  const double asym = (A - A.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw std::domain_error("diagonalize: input is not Hermitian (|A - A^+| = " +
                            std::to_string(asym) + ")");
}

bool is_real(const Mat& A) { return A.imag().cwiseAbs().maxCoeff() == 0.0; }

void lapack_check(lapack_int info, const char* what) {
  if (info != 0)
    throw std::runtime_error(std::string(what) + " failed with info " + std::to_string(info));
}

void require_blas() {
  static const bool ok = blas_self_check();
  if (!ok)
    throw std::runtime_error(
        "BLAS self-check failed: dgemm disagrees with a reference product. With OpenBLAS set "
        "OPENBLAS_CORETYPE=Haswell (or SkylakeX) in the environment");
}

EnergyEigensystem eig_dense(const Mat& H, bool vectors) {
  require_blas();
  check_hermitian(H);
  const lapack_int n = static_cast<lapack_int>(H.rows());
  EnergyEigensystem out;
  out.E.resize(n);
  const char job = vectors ? 'V' : 'N';
  if (n == 0) return out;
  if (is_real(H)) {
    RMat a = H.real();
    lapack_check(LAPACKE_dsyevd(LAPACK_COL_MAJOR, job, 'U', n, a.data(), n, out.E.data()),
                 "dsyevd");
    if (vectors) out.U = a.cast<cplx>();
  } else {
    Mat a = H;
    lapack_check(LAPACKE_zheevd(LAPACK_COL_MAJOR, job, 'U', n, a.data(), n, out.E.data()),
                 "zheevd");
    if (vectors) out.U = std::move(a);
  }
  out.bandwidth = out.E(n - 1) - out.E(0);
  return out;
}

}  // namespace

bool blas_self_check() {
  const int n = 256;
  RMat a(n, n), b(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      a(i, j) = std::sin(0.37 * i + 1.3 * j);
      b(i, j) = std::cos(0.11 * i - 0.7 * j);
    }
  const RMat fast = a * b;
  const RMat slow = a.lazyProduct(b);
  return (fast - slow).norm() <= 1e-10 * slow.norm();
}

EnergyEigensystem diagonalize(const Mat& H) { return eig_dense(H, true); }

EnergyEigensystem diagonalize(const SparseOperator& H) { return eig_dense(Mat(H.mat), true); }

RVec eigenvalues(const SparseOperator& H) { return eig_dense(Mat(H.mat), false).E; }

GapStatistics gap_ratio_stats(const RVec& E, double keep_fraction, int unfold_window) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw std::domain_error("keep_fraction must lie in (0, 1]");
  const auto n = E.size();
  if (n < 2) throw std::domain_error("gap statistics need a spectrum");
  const double bw = E.maxCoeff() - E.minCoeff();
  const auto cut = static_cast<Eigen::Index>(std::floor(n * (1.0 - keep_fraction) / 2.0));
  const Eigen::Index lo = cut, hi = n - cut;
  if (hi - lo < 100)
    throw std::domain_error("gap statistics need at least 100 levels after truncation");

  GapStatistics g;
  g.fraction_used = double(hi - lo) / double(n);
  std::vector<double> s;
  s.reserve(hi - lo);
  for (Eigen::Index a = lo; a + 1 < hi; ++a) {
    const double d = E(a + 1) - E(a);
    if (d < 1e-13 * bw) {
      ++g.dropped;
      continue;
    }
    s.push_back(d);
  }
  if (s.size() < 3) throw std::domain_error("too few non-degenerate spacings");

  double rsum = 0.0;
  for (std::size_t a = 0; a + 1 < s.size(); ++a)
    rsum += std::min(s[a], s[a + 1]) / std::max(s[a], s[a + 1]);
  g.r_mean = rsum / double(s.size() - 1);

  // local-mean unfolding
  const int half = std::max(1, unfold_window / 2);
  std::vector<double> prefix(s.size() + 1, 0.0);
  for (std::size_t a = 0; a < s.size(); ++a) prefix[a + 1] = prefix[a] + s[a];
  std::vector<double> u(s.size());
  const auto m = static_cast<std::ptrdiff_t>(s.size());
  for (std::ptrdiff_t a = 0; a < m; ++a) {
    const auto b0 = std::max<std::ptrdiff_t>(0, a - half);
    const auto b1 = std::min<std::ptrdiff_t>(m, a + half + 1);
    u[a] = s[a] / ((prefix[b1] - prefix[b0]) / double(b1 - b0));
  }
  const double width = 0.1;
  const double smax = *std::max_element(u.begin(), u.end());
  const auto nbins = static_cast<std::size_t>(std::floor(smax / width)) + 1;
  std::vector<double> counts(nbins, 0.0);
  for (double x : u) counts[std::min(nbins - 1, static_cast<std::size_t>(x / width))] += 1.0;
  for (std::size_t k = 0; k < nbins; ++k)
    g.histogram.emplace_back((k + 0.5) * width, counts[k] / (double(u.size()) * width));
  return g;
}

std::vector<double> spectral_form_factor(const RVec& E, const std::vector<double>& times) {
  if (times.empty()) throw std::domain_error("spectral form factor needs a time grid");
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index a = 0; a < E.size(); ++a) {
      re += std::cos(E(a) * t);
      im -= std::sin(E(a) * t);
    }
    out.push_back(re * re + im * im);
  }
  return out;
}

RVec boltzmann_weights(const RVec& E, double beta) {
  if (beta < 0.0) throw std::domain_error("negative inverse temperature");
  const double e0 = E.minCoeff();
  RVec p = (-beta * (E.array() - e0)).exp();
  return p / p.sum();
}

double thermal_energy(const RVec& E, double beta) { return boltzmann_weights(E, beta).dot(E); }

double thermal_energy_spread(const RVec& E, double beta) {
  const RVec p = boltzmann_weights(E, beta);
  const double m = p.dot(E);
  return std::sqrt(std::max(0.0, p.dot((E.array() - m).square().matrix())));
}

double beta_for_energy(const RVec& E, double target) {
  const double emin = E.minCoeff();
  const double emean = E.mean();
  if (target <= emin || target > emean + 1e-12 * (std::abs(emean) + 1.0))
    throw std::domain_error("target energy outside (E_min, mean(E)] has no positive temperature");
  double lo = 0.0, hi = 1.0;
  while (thermal_energy(E, hi) > target) {
    hi *= 2.0;
    if (hi > 1e8) throw std::domain_error("target energy too close to the ground state");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (thermal_energy(E, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ThermalAverages thermal_quantities(const EnergyEigensystem& eig, const ObservableMatrix* O,
                                   double beta) {
  ThermalAverages t;
  const double e0 = eig.E.minCoeff();
  RVec w = (-beta * (eig.E.array() - e0)).exp();
  const double z = w.sum();
  t.log_z = std::log(z) - beta * e0;
  RVec p = w / z;
  t.energy = p.dot(eig.E);
  if (O) {
    if (O->dim() != eig.dim()) throw std::domain_error("observable dimension mismatch");
    const RVec diag = O->O.diagonal().real();
    t.mean = p.dot(diag);
    // (O^2)_nn = sum_m |O_nm|^2
    const RVec sq = O->O.cwiseAbs2().colwise().sum().transpose();
    t.variance = p.dot(sq) - t.mean * t.mean;
  }
  return t;
}

double microcanonical_average(const RVec& O_diag, const RVec& E, double E_star, double window) {
  if (window <= 0.0) throw std::domain_error("microcanonical window must be positive");
  if (O_diag.size() != E.size()) throw std::domain_error("diagonal/eigenvalue size mismatch");
  const double half = 0.5 * window * (E.maxCoeff() - E.minCoeff());
  double sum = 0.0;
  int count = 0;
  Eigen::Index nearest = 0;
  for (Eigen::Index n = 0; n < E.size(); ++n) {
    if (std::abs(E(n) - E_star) < std::abs(E(nearest) - E_star)) nearest = n;
    if (std::abs(E(n) - E_star) <= half) {
      sum += O_diag(n);
      ++count;
    }
  }
  if (count == 0)
    throw std::domain_error("empty microcanonical window; nearest eigenvalue is " +
                            std::to_string(E(nearest)));
  return sum / count;
}

}  // namespace qtherm
