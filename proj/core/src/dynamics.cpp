#include "qtherm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace qtherm {

namespace {

// Collapses all pairs into (omega, weight) so each time point is a single pass.
struct PairSpectrum {
  std::vector<double> w;
  std::vector<double> a;
  double constant = 0.0;  // omega == 0 contributions, diagonal included
};

PairSpectrum pair_spectrum(const ObservableMatrix& Om, const RVec& weights) {
  const auto n = Om.dim();
  if (weights.size() != n) throw std::domain_error("weight vector does not match observable");
  PairSpectrum s;
  s.w.reserve(n * n);
  s.a.reserve(n * n);
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double c = weights(k) * std::norm(Om.O(k, m));
      if (c == 0.0) continue;
      const double w = Om.E(m) - Om.E(k);
      if (w == 0.0) {
        s.constant += c;
      } else {
        s.w.push_back(w);
        s.a.push_back(c);
      }
    }
  return s;
}

CorrelationSeries evaluate(const PairSpectrum& s, double mean, const std::vector<double>& times) {
  CorrelationSeries out;
  out.t = times;
  out.value.reserve(times.size());
  for (double t : times) {
    double re = s.constant, im = 0.0;
    for (std::size_t k = 0; k < s.w.size(); ++k) {
      re += s.a[k] * std::cos(s.w[k] * t);
      im -= s.a[k] * std::sin(s.w[k] * t);
    }
    out.value.emplace_back(re - mean * mean, im);
  }
  return out;
}

double trapz(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) s += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
  return s;
}

}  // namespace

CorrelationSeries f2_weighted(const ObservableMatrix& Om, const RVec& weights,
                              const std::vector<double>& times) {
  const double mean = weights.dot(Om.O.diagonal().real());
  auto out = evaluate(pair_spectrum(Om, weights), mean, times);
  out.source = Provenance::eigenstate;
  return out;
}

CorrelationSeries f2_canonical(const EnergyEigensystem& eig, const ObservableMatrix& Om,
                               double beta, const std::vector<double>& times) {
  auto out = f2_weighted(Om, boltzmann_weights(eig.E, beta), times);
  out.source = Provenance::canonical_exact;
  return out;
}

double eigenstate_variance(const ObservableMatrix& Om, double E_star, double window) {
  const double half = 0.5 * window * (Om.E.maxCoeff() - Om.E.minCoeff());
  double s = 0.0;
  int c = 0;
  for (Eigen::Index n = 0; n < Om.dim(); ++n) {
    if (std::abs(Om.E(n) - E_star) > half) continue;
    s += Om.O.col(n).squaredNorm() - std::norm(Om.O(n, n));
    ++c;
  }
  if (c == 0) throw std::domain_error("no eigenstates inside the variance window");
  return s / c;
}

std::pair<FrequencyProfile, FrequencyProfile> eth_spectral_functions(const FrequencyProfile& f2,
                                                                     double beta) {
  FrequencyProfile sp = f2, sm = f2;
  for (std::size_t k = 0; k < f2.omega.size(); ++k) {
    const double x = 0.5 * beta * f2.omega[k];
    sp.value[k] = 4.0 * std::numbers::pi * std::cosh(x) * f2.value[k];
    sm.value[k] = 4.0 * std::numbers::pi * std::sinh(x) * f2.value[k];
  }
  return {sp, sm};
}

CorrelationSeries eth_reconstruct(const FrequencyProfile& f2, double beta, double variance,
                                  const std::vector<double>& times) {
  if (!(variance > 0.0)) throw std::domain_error("variance sum rule must be positive");
  if (f2.omega.size() < 2) throw std::domain_error("profile needs at least two bins");
  auto [sp, sm] = eth_spectral_functions(f2, beta);
  const double area = trapz(sp.omega, sp.value);
  if (!(area > 0.0)) throw std::domain_error("spectral function has no weight");
  const double scale = variance / area;
  CorrelationSeries out;
  out.source = Provenance::eth_reconstructed;
  out.t = times;
  std::vector<double> yc(sp.omega.size()), ys(sp.omega.size());
  for (double t : times) {
    for (std::size_t k = 0; k < sp.omega.size(); ++k) {
      yc[k] = std::cos(sp.omega[k] * t) * sp.value[k];
      ys[k] = std::sin(sp.omega[k] * t) * sm.value[k];
    }
    out.value.emplace_back(scale * trapz(sp.omega, yc), -scale * trapz(sp.omega, ys));
  }
  return out;
}

std::pair<FrequencyProfile, FrequencyProfile> spectral_functions(const ObservableMatrix& Om,
                                                                 const RVec& weights,
                                                                 double domega, double omega_max) {
  if (domega <= 0.0 || omega_max <= 0.0) throw std::domain_error("bad frequency grid");
  const auto nb = static_cast<std::size_t>(std::ceil(omega_max / domega));
  std::vector<double> cp(nb, 0.0), cm(nb, 0.0);
  std::vector<std::size_t> cnt(nb, 0);
  const auto n = Om.dim();
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double w = Om.E(m) - Om.E(k);
      if (w == 0.0 || std::abs(w) >= nb * domega) continue;
      const auto b = static_cast<std::size_t>(std::abs(w) / domega);
      (w > 0 ? cp : cm)[b] += weights(k) * std::norm(Om.O(k, m));
      ++cnt[b];
    }
  FrequencyProfile sp, sm;
  sp.domega = sm.domega = domega;
  for (std::size_t b = 0; b < nb; ++b) {
    if (cnt[b] == 0) continue;
    const double w = (b + 0.5) * domega;
    sp.omega.push_back(w);
    sm.omega.push_back(w);
    sp.value.push_back((cp[b] + cm[b]) / domega);
    sm.value.push_back((cp[b] - cm[b]) / domega);
    sp.count.push_back(cnt[b]);
    sm.count.push_back(cnt[b]);
  }
  return {sp, sm};
}

double fdt_beta_fit(const FrequencyProfile& Splus, const FrequencyProfile& Sminus,
                    double omega_max_fit) {
  if (Splus.omega.size() != Sminus.omega.size())
    throw std::domain_error("S+ and S- profiles must share bins");
  std::vector<double> w, r;
  for (std::size_t k = 0; k < Splus.omega.size(); ++k) {
    if (Splus.omega[k] <= 0.0 || Splus.omega[k] > omega_max_fit) continue;
    if (Splus.value[k] == 0.0) continue;
    w.push_back(Splus.omega[k]);
    r.push_back(Sminus.value[k] / Splus.value[k]);
  }
  if (w.empty()) throw std::domain_error("no usable bins for the FDT fit");
  auto cost = [&](double beta) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double d = r[k] - std::tanh(0.5 * beta * w[k]);
      s += d * d;
    }
    return s;
  };
  // coarse scan, then golden-section refinement
  const double span = 200.0;
  const int ns = 4001;
  double best = 0.0, bc = cost(0.0);
  for (int k = 0; k < ns; ++k) {
    const double b = -span + 2.0 * span * k / (ns - 1);
    const double c = cost(b);
    if (c < bc) bc = c, best = b;
  }
  const double step = 2.0 * span / (ns - 1);
  double lo = best - step, hi = best + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - g * (hi - lo), f1 = cost(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + g * (hi - lo), f2 = cost(x2);
    }
  }
  return 0.5 * (lo + hi);
}

QfiReport qfi(const EnergyEigensystem& eig, const ObservableMatrix& Om,
              const std::vector<double>& betas, int L, double window) {
  const auto n = eig.dim();
  if (Om.dim() != n) throw std::domain_error("observable does not match eigensystem");
  RVec var(n);
  for (Eigen::Index k = 0; k < n; ++k)
    var(k) = Om.O.col(k).squaredNorm() - std::norm(Om.O(k, k));
  QfiReport q;
  for (double beta : betas) {
    const RVec p = boltzmann_weights(eig.E, beta);
    double fg = 0.0;
    for (Eigen::Index m = 0; m < n; ++m)
      for (Eigen::Index k = 0; k < n; ++k) {
        const double s = p(k) + p(m);
        if (s < 1e-300) continue;
        const double d = p(k) - p(m);
        fg += d * d / s * std::norm(Om.O(k, m));
      }
    fg *= 2.0;
    double fe;
    if (window > 0.0)
      fe = 4.0 * microcanonical_average(var, eig.E, p.dot(eig.E), window);
    else
      fe = 4.0 * p.dot(var);
    q.beta.push_back(beta);
    q.F_gibbs.push_back(fg);
    q.F_eth.push_back(fe);
    q.f_gibbs.push_back(fg / L);
    q.f_eth.push_back(fe / L);
  }
  return q;
}

std::vector<double> otoc_exact(const EnergyEigensystem& eig, const ObservableMatrix& Om,
                               double beta, const std::vector<double>& times) {
  const RVec p = boltzmann_weights(eig.E, beta);
  const auto n = eig.dim();
  std::vector<double> out;
  for (double t : times) {
    Vec ph(n);
    for (Eigen::Index k = 0; k < n; ++k) ph(k) = std::exp(kI * eig.E(k) * t);
    const Mat Ot = ph.asDiagonal() * Om.O * ph.conjugate().asDiagonal();
    const Mat C = Ot * Om.O - Om.O * Ot;
    cplx c2 = 0.0, c1 = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      c2 += p(k) * C.row(k).transpose().cwiseProduct(C.col(k)).sum();
      c1 += p(k) * C(k, k);
    }
    out.push_back(-(c2 - c1 * c1).real());
  }
  return out;
}

std::vector<double> otoc_eth_uncorrelated(const CorrelationSeries& F2) {
  if (F2.value.empty()) return {};
  const double f0 = std::norm(F2.value.front());
  std::vector<double> out;
  for (const auto& v : F2.value) out.push_back(2.0 * f0 - 2.0 * std::norm(v));
  return out;
}

Vec krylov_evolve(const SparseOperator& H, const Vec& psi, double t, int m, double dt_max,
                  KrylovStats* stats) {
  if (m < 4) throw std::domain_error("Krylov dimension must be at least 4");
  if (H.dim() != psi.size()) throw std::domain_error("state and Hamiltonian sizes differ");
  const double nrm = psi.norm();
  if (std::abs(nrm - 1.0) > 1e-12) throw std::domain_error("Krylov input state is not normalized");
  const int mm = static_cast<int>(std::min<Eigen::Index>(m, psi.size()));
  Vec v = psi;
  double done = 0.0;
  const double sgn = t < 0 ? -1.0 : 1.0;
  const double total = std::abs(t);
  KrylovStats st;
  const double tol = 1e-13;
  while (done < total) {
    Mat V(psi.size(), mm + 1);
    Mat A = Mat::Zero(mm + 1, mm);
    V.col(0) = v;
    int k = 0;
    double h_next = 0.0;
    for (; k < mm; ++k) {
      Vec w = H.mat * V.col(k);
      for (int j = 0; j <= k; ++j) {
        A(j, k) = V.col(j).dot(w);
        w -= A(j, k) * V.col(j);
      }
      for (int j = 0; j <= k; ++j) {  // second pass keeps the basis orthogonal
        const cplx c = V.col(j).dot(w);
        A(j, k) += c;
        w -= c * V.col(j);
      }
      h_next = w.norm();
      A(k + 1, k) = h_next;
      if (h_next < 1e-14) {
        ++k;
        break;
      }
      V.col(k + 1) = w / h_next;
    }
    const bool exact = h_next < 1e-14;
    const Mat Ak = A.topLeftCorner(k, k);
    double tau = std::min(dt_max, total - done);
    Vec y;
    for (;;) {
      const Mat E = (-kI * sgn * tau * Ak).exp();
      y = E.col(0);
      const double err = exact ? 0.0 : h_next * std::abs(y(k - 1));
      if (err <= tol * tau || tau < 1e-8) {
        st.error_bound += err;
        break;
      }
      tau *= 0.5;
    }
    v = V.leftCols(k) * y;
    done += tau;
    ++st.steps;
  }
  if (stats) *stats = st;
  return v;
}

OtocSamples otoc_typicality(const SparseOperator& H, const SparseOperator& O,
                            const std::vector<double>& times, int n_samples, std::uint64_t seed,
                            int m, double rel_stderr_stop) {
  if (n_samples < 1) throw std::domain_error("need at least one sample");
  const auto d = H.dim();
  const std::size_t nt = times.size();
  std::vector<double> s1(nt, 0.0), s2(nt, 0.0);
  OtocSamples out;
  out.t = times;
  auto U = [&](const Vec& x, double t) {
    if (t == 0.0) return Vec(x);
    const double nx = x.norm();
    if (nx == 0.0) return Vec(x);
    return Vec(nx * krylov_evolve(H, x / nx, t, m));
  };
  for (int s = 0; s < n_samples; ++s) {
    std::seed_seq sq{seed, static_cast<std::uint64_t>(s)};
    std::mt19937_64 rng(sq);
    std::normal_distribution<double> g;
    Vec psi(d);
    for (Eigen::Index k = 0; k < d; ++k) psi(k) = cplx(g(rng), g(rng));
    psi.normalize();
    const Vec opsi = O.mat * psi;
    Vec psi_t = psi, opsi_t = opsi;
    double tprev = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
      psi_t = U(psi_t, times[k] - tprev);
      opsi_t = U(opsi_t, times[k] - tprev);
      tprev = times[k];
      // O(t) O psi and O O(t) psi
      const Vec a = U(O.mat * opsi_t, -times[k]);
      const Vec b = O.mat * U(O.mat * psi_t, -times[k]);
      const Vec c = a - b;
      const double val = c.squaredNorm() - std::norm(psi.dot(c));
      s1[k] += val;
      s2[k] += val * val;
    }
    out.samples = s + 1;
    if (out.samples >= 10) {
      double worst = 0.0, peak = 0.0;
      for (std::size_t k = 0; k < nt; ++k) peak = std::max(peak, std::abs(s1[k]));
      for (std::size_t k = 0; k < nt; ++k) {
        const double mean = s1[k] / out.samples;
        if (std::abs(mean) <= 1e-12 * peak / out.samples) continue;
        const double var = std::max(0.0, s2[k] / out.samples - mean * mean);
        worst = std::max(worst, std::sqrt(var / (out.samples - 1)) / std::abs(mean));
      }
      if (worst <= rel_stderr_stop) break;
    }
  }
  for (std::size_t k = 0; k < nt; ++k) {
    const double mean = s1[k] / out.samples;
    const double var = std::max(0.0, s2[k] / out.samples - mean * mean);
    out.mean.push_back(mean);
    out.stderr_.push_back(out.samples > 1 ? std::sqrt(var / (out.samples - 1)) : 0.0);
  }
  return out;
}

double saturation_time(const std::vector<double>& t, const std::vector<double>& c, double eps,
                       double half_window) {
  if (t.size() != c.size() || t.empty()) throw std::domain_error("bad series");
  auto running = [&](std::size_t k) {
    double s = 0.0;
    int n = 0;
    for (std::size_t j = 0; j < t.size(); ++j)
      if (std::abs(t[j] - t[k]) <= half_window) s += c[j], ++n;
    return s / n;
  };
  std::size_t last = t.size() - 1;
  while (last > 0 && t.back() - t[last] < half_window) --last;
  const double c_inf = running(last);
  for (std::size_t k = 0; k < t.size(); ++k)
    if (running(k) >= eps * c_inf) return t[k];
  return t.back();
}

namespace {

DrivenRun driven_once(const SparseOperator& H, const SparseOperator& V, const Vec& psi0, double a,
                      double omega0, double t_prep, double t_relax,
                      const std::vector<SparseOperator>& obs, double dt, double record_every) {
  DrivenRun r;
  r.dt = dt;
  Vec psi = psi0;
  auto rhs = [&](const Vec& x, double t, bool drive) {
    Vec y = H.mat * x;
    if (drive && a != 0.0) y += a * std::sin(omega0 * t) * (V.mat * x);
    return Vec(-kI * y);
  };
  auto step = [&](double t, bool drive) {
    const Vec k1 = rhs(psi, t, drive);
    const Vec k2 = rhs(psi + 0.5 * dt * k1, t + 0.5 * dt, drive);
    const Vec k3 = rhs(psi + 0.5 * dt * k2, t + 0.5 * dt, drive);
    const Vec k4 = rhs(psi + dt * k3, t + dt, drive);
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  const auto n_prep = static_cast<long>(std::llround(t_prep / dt));
  for (long s = 0; s < n_prep; ++s) step(s * dt, true);
  r.psi_prep = psi;
  const Vec hp = H.mat * psi;
  r.E_prep = psi.dot(hp).real();
  r.dE2 = hp.squaredNorm() - r.E_prep * r.E_prep;
  r.series.assign(obs.size(), {});
  const auto n_rel = static_cast<long>(std::llround(t_relax / dt));
  const long every = std::max<long>(1, std::llround(record_every / dt));
  for (long s = 0; s <= n_rel; ++s) {
    if (s % every == 0) {
      r.times.push_back(s * dt);
      for (std::size_t k = 0; k < obs.size(); ++k)
        r.series[k].push_back(psi.dot(obs[k].mat * psi).real() / psi.squaredNorm());
    }
    if (s < n_rel) step(0.0, false);
  }
  r.norm_drift = std::abs(psi.norm() - 1.0);
  return r;
}

}  // namespace

DrivenRun driven_relaxation(const SparseOperator& H, const SparseOperator& V, const Vec& psi0,
                            double a, double omega0, double t_prep, double t_relax,
                            const std::vector<SparseOperator>& observables, double dt,
                            double record_every) {
  if (dt <= 0.0) throw std::domain_error("time step must be positive");
  DrivenRun r;
  for (int attempt = 0; attempt < 5; ++attempt, dt *= 0.5) {
    r = driven_once(H, V, psi0, a, omega0, t_prep, t_relax, observables, dt, record_every);
    if (r.norm_drift < 1e-6) return r;
  }
  if (r.norm_drift > 1e-4)
    throw std::runtime_error("RK4 norm drift " + std::to_string(r.norm_drift) +
                             " exceeds 1e-4; reduce the time step below " + std::to_string(dt));
  return r;
}

}  // namespace qtherm
