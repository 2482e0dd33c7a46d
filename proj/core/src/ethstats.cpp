#include "qtherm/ethstats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace qtherm {

ObservableMatrix to_eigenbasis(const Mat& O, const EnergyEigensystem& eig, bool extensive) {
  if (O.rows() != eig.dim() || O.cols() != eig.dim())
    throw std::domain_error("observable and eigensystem dimensions differ");
  ObservableMatrix out;
  Mat r = eig.U.adjoint() * (O * eig.U);
  out.O = 0.5 * (r + r.adjoint());
  out.E = eig.E;
  out.extensive = extensive;
  return out;
}

ObservableMatrix to_eigenbasis(const SparseOperator& O, const EnergyEigensystem& eig,
                               bool extensive) {
  if (O.dim() != eig.dim()) throw std::domain_error("observable and eigensystem dimensions differ");
  ObservableMatrix out;
  Mat ou = O.mat * eig.U;
  Mat r = eig.U.adjoint() * ou;
  out.O = 0.5 * (r + r.adjoint());
  out.E = eig.E;
  out.extensive = extensive;
  return out;
}

DiagonalProfile diagonal_profile(const ObservableMatrix& Om, double central_fraction,
                                 double coarse_width) {
  if (!(central_fraction > 0.0 && central_fraction <= 1.0))
    throw std::domain_error("central_fraction must lie in (0, 1]");
  const auto n = Om.dim();
  DiagonalProfile d;
  if (n == 0) return d;
  const double emin = Om.E.minCoeff(), bw = Om.E.maxCoeff() - emin;
  std::map<long, std::pair<double, int>> bins;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double e = bw > 0 ? (Om.E(k) - emin) / bw : 0.0;
    d.eps.push_back(e);
    d.O_nn.push_back(Om.O(k, k).real());
    auto& b = bins[static_cast<long>(std::floor(e / coarse_width))];
    b.first += d.O_nn.back();
    b.second += 1;
  }
  for (auto& [k, v] : bins) d.coarse.emplace_back((k + 0.5) * coarse_width, v.first / v.second);

  const auto keep = std::max<Eigen::Index>(2, std::llround(central_fraction * n));
  const auto lo = std::max<Eigen::Index>(0, (n - keep) / 2);
  const auto hi = std::min<Eigen::Index>(n, lo + keep);
  double s = 0.0;
  int c = 0;
  for (auto k = lo; k + 1 < hi; ++k, ++c) s += std::abs(d.O_nn[k + 1] - d.O_nn[k]);
  d.ete = c ? s / c : 0.0;
  return d;
}

namespace {

struct Bin {
  double s1 = 0.0, s2 = 0.0;
  std::size_t n = 0;
};

std::map<long, Bin> accumulate_pairs(const ObservableMatrix& Om, double E_star, double window,
                                     double domega) {
  if (window <= 0.0) throw std::domain_error("energy window must be positive");
  if (domega <= 0.0) throw std::domain_error("bin width must be positive");
  const auto n = Om.dim();
  const double bw = n ? Om.E.maxCoeff() - Om.E.minCoeff() : 0.0;
  const double half = 0.5 * window * bw;
  std::map<long, Bin> bins;
  std::size_t pairs = 0;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (std::abs(0.5 * (Om.E(k) + Om.E(m)) - E_star) > half) continue;
      ++pairs;
      const double a = std::abs(Om.O(k, m));
      auto& b = bins[static_cast<long>(std::abs(Om.E(m) - Om.E(k)) / domega)];
      b.s1 += a;
      b.s2 += a * a;
      ++b.n;
    }
  }
  if (pairs == 0) throw std::domain_error("no eigenstate pairs inside the energy window");
  return bins;
}

}  // namespace

FrequencyProfile offdiag_f2_profile(const ObservableMatrix& Om, double E_star, double window,
                                    double domega) {
  FrequencyProfile p{{}, {}, {}, E_star, window, domega};
  for (const auto& [k, b] : accumulate_pairs(Om, E_star, window, domega)) {
    if (b.s2 == 0.0) continue;
    p.omega.push_back((k + 0.5) * domega);
    p.value.push_back(b.s2 / b.n);
    p.count.push_back(b.n);
  }
  return p;
}

FrequencyProfile gamma_ratio_profile(const ObservableMatrix& Om, double E_star, double window,
                                     double domega, std::size_t min_count) {
  FrequencyProfile p{{}, {}, {}, E_star, window, domega};
  for (const auto& [k, b] : accumulate_pairs(Om, E_star, window, domega)) {
    if (b.n < min_count || b.s1 == 0.0) continue;
    const double m1 = b.s1 / b.n;
    p.omega.push_back((k + 0.5) * domega);
    p.value.push_back((b.s2 / b.n) / (m1 * m1));
    p.count.push_back(b.n);
  }
  return p;
}

Mat banded_submatrix(const ObservableMatrix& Om, double E_star, double window, double omega_c,
                     std::size_t* centre) {
  if (omega_c < 0.0) throw std::domain_error("omega_c must be non-negative");
  const auto n = Om.dim();
  if (n == 0) throw std::domain_error("empty observable");
  Eigen::Index c = 0;
  for (Eigen::Index k = 1; k < n; ++k)
    if (std::abs(Om.E(k) - E_star) < std::abs(Om.E(c) - E_star)) c = k;
  const double half = 0.5 * window * (Om.E.maxCoeff() - Om.E.minCoeff());
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < n; ++k)
    if (std::abs(Om.E(k) - Om.E(c)) <= half) idx.push_back(k);
  if (centre) *centre = static_cast<std::size_t>(c);
  const auto d = static_cast<Eigen::Index>(idx.size());
  Mat s = Mat::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b)
      if (a == b || std::abs(Om.E(idx[a]) - Om.E(idx[b])) < omega_c) s(a, b) = Om.O(idx[a], idx[b]);
  return s;
}

Mat randomize_signs(const Mat& A, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Mat out = A;
  for (Eigen::Index b = 0; b < A.cols(); ++b)
    for (Eigen::Index a = 0; a < b; ++a)
      if (coin(rng)) {
        out(a, b) = -A(a, b);
        out(b, a) = -A(b, a);
      }
  return out;
}

double mean_gap_ratio(const RVec& E) {
  RVec e = E;
  std::sort(e.data(), e.data() + e.size());
  double s = 0.0;
  int c = 0;
  for (Eigen::Index a = 0; a + 2 < e.size(); ++a) {
    const double s1 = e(a + 1) - e(a), s2 = e(a + 2) - e(a + 1);
    const double mx = std::max(s1, s2);
    if (mx <= 0.0) continue;
    s += std::min(s1, s2) / mx;
    ++c;
  }
  return c ? s / c : 0.0;
}

BandedTest banded_goe_test(const ObservableMatrix& Om, double E_star, double window,
                           double omega_c, std::uint64_t seed) {
  BandedTest t;
  Mat s = banded_submatrix(Om, E_star, window, omega_c, &t.centre);
  t.dim = static_cast<std::size_t>(s.rows());
  if (t.dim < 50) throw std::domain_error("banded sub-matrix smaller than 50 states");
  t.spectrum = diagonalize(s).E;
  t.randomized_spectrum = diagonalize(randomize_signs(s, seed)).E;
  t.r_mean = mean_gap_ratio(t.spectrum);
  t.r_mean_randomized = mean_gap_ratio(t.randomized_spectrum);
  t.below_floor = t.r_mean < 0.45;
  return t;
}

double fourth_moment_ratio(const RVec& x) {
  if (x.size() < 2) throw std::domain_error("moment ratio needs at least two values");
  const RVec c = x.array() - x.mean();
  const double m2 = c.array().square().mean();
  const double m4 = c.array().square().square().mean();
  return m4 / (m2 * m2);
}

std::vector<std::pair<double, double>> histogram(const RVec& x, double width) {
  std::vector<std::pair<double, double>> out;
  if (x.size() == 0) return out;
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  const double lo = v.front(), hi = v.back();
  if (width <= 0.0) {
    auto q = [&](double f) { return v[static_cast<std::size_t>(f * (v.size() - 1))]; };
    const double iqr = q(0.75) - q(0.25);
    width = 2.0 * iqr / std::cbrt(double(v.size()));
    if (width <= 0.0) width = hi > lo ? (hi - lo) / 10.0 : 1.0;
  }
  const auto nb = static_cast<std::size_t>(std::floor((hi - lo) / width)) + 1;
  std::vector<double> counts(nb, 0.0);
  for (double a : v) counts[std::min(nb - 1, static_cast<std::size_t>((a - lo) / width))] += 1.0;
  for (std::size_t k = 0; k < nb; ++k)
    out.emplace_back(lo + (k + 0.5) * width, counts[k] / (v.size() * width));
  return out;
}

}  // namespace qtherm
