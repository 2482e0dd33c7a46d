#include "qtherm/kubo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qtherm {

namespace {

double degeneracy_tol(const RVec& E) {
  return 1e-12 * (E.size() ? E.maxCoeff() - E.minCoeff() : 0.0);
}

// (1 - e^{-beta w}) / w, finite as w -> 0
double thermal_factor(double beta, double w) { return -std::expm1(-beta * w) / w; }

void check_dims(const EnergyEigensystem& eig, const ObservableMatrix& J, const ObservableMatrix& T) {
  if (J.dim() != eig.dim() || T.dim() != eig.dim())
    throw std::domain_error("current/kinetic matrices do not match the eigensystem");
}

}  // namespace

SparseOperator kubo_current(const ModelSpec& spec, const SectorBasis& basis) {
  auto c = build_current_operators(spec, basis);
  c.total.mat *= 0.5;
  return c.total;
}

DrudeWeights drude_weights(const EnergyEigensystem& eig, const ObservableMatrix& J,
                           const ObservableMatrix& T, int L, double beta) {
  check_dims(eig, J, T);
  const RVec p = boltzmann_weights(eig.E, beta);
  const double tol = degeneracy_tol(eig.E);
  const auto n = eig.dim();
  double minus_t = -p.dot(T.O.diagonal().real());
  double reg = 0.0, deg = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double j2 = std::norm(J.O(k, m));
      const double w = eig.E(m) - eig.E(k);
      if (std::abs(w) <= tol)
        deg += p(k) * j2;
      else
        reg += (p(k) - p(m)) / w * j2;
    }
  }
  return {(minus_t - reg) / L, beta * deg / L};
}

ConductivityProfile conductivity_profile(const EnergyEigensystem& eig, const ObservableMatrix& J,
                                         const ObservableMatrix& T, int L, double beta,
                                         double domega, bool normalize) {
  if (domega <= 0.0) throw std::domain_error("bin width must be positive");
  if (beta <= 0.0) throw std::domain_error("conductivity profile needs beta > 0");
  check_dims(eig, J, T);
  const RVec p = boltzmann_weights(eig.E, beta);
  const double tol = degeneracy_tol(eig.E);
  const auto n = eig.dim();

  ConductivityProfile out;
  out.beta = beta;
  out.domega = domega;
  out.L = L;
  out.normalized = normalize;
  const auto dw = drude_weights(eig, J, T, L, beta);
  out.D_L = dw.D_L;
  out.D_bar = dw.D_bar;
  out.minus_T = -p.dot(T.O.diagonal().real());

  const double wmax = eig.E.size() ? eig.E.maxCoeff() - eig.E.minCoeff() : 0.0;
  const auto nbins = static_cast<std::size_t>(std::floor(wmax / domega)) + 1;
  std::vector<double> acc(nbins, 0.0);
  const double pref = std::numbers::pi / L;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double w = eig.E(m) - eig.E(k);
      if (w <= tol) continue;
      const double c = pref * thermal_factor(beta, w) * p(k) * std::norm(J.O(k, m));
      acc[std::min(nbins - 1, static_cast<std::size_t>(w / domega))] += c;
      out.finite_weight += c;
    }
  }

  const double norm = std::numbers::pi * out.minus_T / L;
  if (normalize && !(norm > 0.0))
    throw std::domain_error("cannot normalize: <-T> is not positive");
  out.sum_rule = norm > 0.0 ? (std::numbers::pi * out.D_L / 2.0 + out.finite_weight) / norm : 0.0;
  for (std::size_t b = 0; b < nbins; ++b) {
    out.omega.push_back((b + 0.5) * domega);
    out.sigma.push_back(acc[b] / domega / (normalize ? norm : 1.0));
  }
  return out;
}

ConductivityProfile free_fermion_conductivity(const ModelSpec& spec, double domega) {
  if (domega <= 0.0) throw std::domain_error("bin width must be positive");
  if (spec.Delta != 0.0) throw std::domain_error("free-fermion path requires Delta = 0");
  if (spec.kind == ModelKind::fermion_chain)
    throw std::domain_error("free-fermion path expects a spin-chain spec");
  const int L = spec.L;
  RMat h = RMat::Zero(L, L), t = RMat::Zero(L, L);
  Mat j = Mat::Zero(L, L);
  auto link = [&](int a, int b) {
    h(a, b) = h(b, a) = 2.0 * spec.alpha;
    t(a, b) = t(b, a) = 2.0 * spec.alpha;
    j(a, b) = 2.0 * spec.alpha * kI;
    j(b, a) = -2.0 * spec.alpha * kI;
  };
  for (int a = 0; a + 1 < L; ++a) link(a, a + 1);
  if (spec.boundary == Boundary::periodic && L > 2) link(L - 1, 0);
  if (spec.kind == ModelKind::single_impurity) h(L / 2 - 1, L / 2 - 1) += 2.0 * spec.h;
  if (spec.kind == ModelKind::staggered_field)
    for (int a = 0; a < L; a += 2) h(a, a) += 2.0 * spec.b;
  h(0, 0) += 2.0 * spec.edge;

  Eigen::SelfAdjointEigenSolver<RMat> es(h);
  const RVec& e = es.eigenvalues();
  const Mat U = es.eigenvectors().cast<cplx>();
  const Mat jk = U.adjoint() * j * U;
  const RVec tk = (es.eigenvectors().transpose() * t * es.eigenvectors()).diagonal();
  const double denom = e.dot(tk);  // 4 <-T> / beta to leading order
  if (!(denom > 0.0)) throw std::domain_error("degenerate kinetic normalization");
  const double tol = 1e-12 * (e.maxCoeff() - e.minCoeff());

  ConductivityProfile out;
  out.L = L;
  out.domega = domega;
  out.normalized = true;
  const double wmax = e.maxCoeff() - e.minCoeff();
  const auto nbins = static_cast<std::size_t>(std::floor(wmax / domega)) + 1;
  std::vector<double> acc(nbins, 0.0);
  double deg = 0.0;
  for (int q = 0; q < L; ++q) {
    for (int k = 0; k < L; ++k) {
      const double w = e(q) - e(k);
      const double j2 = std::norm(jk(k, q));
      if (std::abs(w) <= tol) {
        deg += j2;
      } else if (w > 0.0) {
        acc[std::min(nbins - 1, static_cast<std::size_t>(w / domega))] += j2 / denom;
        out.finite_weight += j2 / denom;
      }
    }
  }
  // Drude fraction of the total normalized weight (= 1) from degenerate pairs
  out.D_bar = deg / denom;
  out.D_L = out.D_bar;
  out.sum_rule = out.finite_weight + out.D_L / 2.0;
  for (std::size_t b = 0; b < nbins; ++b) {
    out.omega.push_back((b + 0.5) * domega);
    out.sigma.push_back(acc[b] / domega);
  }
  return out;
}

double peak_weight_xi(const ConductivityProfile& p, double omega_lo, double omega_hi,
                      double baseline) {
  if (!(omega_lo < omega_hi)) throw std::domain_error("peak window needs omega_lo < omega_hi");
  double xi = 0.0;
  int used = 0;
  for (std::size_t b = 0; b < p.omega.size(); ++b) {
    if (p.omega[b] < omega_lo || p.omega[b] > omega_hi) continue;
    xi += (p.sigma[b] - baseline) * p.domega;
    ++used;
  }
  if (used == 0) throw std::domain_error("peak window contains no bins");
  return std::max(0.0, 2.0 * xi);
}

std::vector<double> cumulative_weight(const ConductivityProfile& p) {
  std::vector<double> out;
  out.reserve(p.sigma.size());
  double acc = 0.0;
  if (p.normalized) {
    if (p.beta > 0.0 && p.minus_T > 0.0)
      acc = p.D_L * p.L / (2.0 * p.minus_T);
    else
      acc = p.D_L / 2.0;
  }
  for (double s : p.sigma) {
    acc += s * p.domega;
    out.push_back(acc);
  }
  return out;
}

}  // namespace qtherm
