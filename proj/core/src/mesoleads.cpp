#include "qtherm/mesoleads.hpp"

#include "qtherm/spinops.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qtherm {

double fermi(double e, double beta, double mu) {
  // tanh form stays finite for any |beta (e - mu)|
  return 0.5 * (1.0 - std::tanh(0.5 * beta * (e - mu)));
}

LeadSpec discretize_lead(double W, double W_star, int L, double log_fraction, double beta,
                         double mu, double Gamma) {
  if (!(W_star > 0.0 && W_star < W)) throw std::domain_error("need 0 < W* < W");
  if (L < 1) throw std::domain_error("lead needs at least one mode");
  if (log_fraction < 0.0 || log_fraction >= 1.0)
    throw std::domain_error("log_fraction must lie in [0, 1)");
  if (beta <= 0.0) throw std::domain_error("lead temperature must be positive and finite");
  if (Gamma < 0.0) throw std::domain_error("negative coupling strength");
  const double nlog = L * log_fraction;
  if (std::abs(nlog - std::round(nlog)) > 1e-9)
    throw std::domain_error("L * log_fraction = " + std::to_string(nlog) + " is not an integer");

  LeadSpec lead;
  lead.beta = beta;
  lead.mu = mu;
  lead.W = W;
  lead.W_star = W_star;
  lead.Gamma = Gamma;
  const int per_side = static_cast<int>(std::lround(nlog)) / 2;
  lead.L_log = 2 * per_side;
  lead.L_lin = L - lead.L_log;
  if (lead.L_lin < 1) throw std::domain_error("no modes left for the linear window");

  std::vector<std::pair<double, double>> modes;  // (energy, width)
  if (per_side > 0) {
    const double lam = std::pow(W / W_star, 1.0 / per_side);
    // boundaries W, W/lam, ..., W*; the last one is pinned to avoid round-off
    std::vector<double> edge(per_side + 1);
    for (int n = 0; n <= per_side; ++n) edge[n] = W * std::pow(lam, -n);
    edge[per_side] = W_star;
    for (int n = 0; n < per_side; ++n)
      modes.emplace_back(-0.5 * (edge[n] + edge[n + 1]), edge[n] - edge[n + 1]);
  }
  const double e = 2.0 * W_star / lead.L_lin;
  for (int n = 0; n < lead.L_lin; ++n) modes.emplace_back(-W_star + (n + 0.5) * e, e);
  for (int n = per_side - 1; n >= 0; --n) {
    const auto& m = modes[n];
    modes.emplace_back(-m.first, m.second);
  }

  for (const auto& [eps, w] : modes) {
    lead.eps.push_back(eps);
    lead.spacing.push_back(w);
    lead.gamma.push_back(w);
    lead.kappa.push_back(std::sqrt(Gamma * w / (2.0 * std::numbers::pi)));
    lead.f.push_back(fermi(eps, beta, mu));
  }
  return lead;
}

double effective_spectral_density(const LeadSpec& lead, double omega) {
  double j = 0.0;
  for (std::size_t k = 0; k < lead.size(); ++k) {
    const double d = omega - lead.eps[k], g = 0.5 * lead.gamma[k];
    j += lead.kappa[k] * lead.kappa[k] * lead.gamma[k] / (d * d + g * g);
  }
  return j;
}

SuperfermionNess build_superfermion_generator(const Mat& system, const LeadSpec& left,
                                              const LeadSpec& right) {
  if (system.rows() != system.cols() || system.rows() < 1)
    throw std::domain_error("system matrix must be square and non-empty");
  SuperfermionNess s;
  s.D = static_cast<int>(system.rows());
  const int nl = static_cast<int>(left.size()), nr = static_cast<int>(right.size());
  s.M = s.D + nl + nr;
  s.H = Mat::Zero(s.M, s.M);
  s.H.topLeftCorner(s.D, s.D) = system;
  s.gain = RVec::Zero(s.M);
  s.loss = RVec::Zero(s.M);
  auto attach = [&](const LeadSpec& lead, int offset, int site) {
    for (int k = 0; k < static_cast<int>(lead.size()); ++k) {
      const int a = offset + k;
      s.H(a, a) = lead.eps[k];
      s.H(site, a) = lead.kappa[k];
      s.H(a, site) = lead.kappa[k];
      s.gain(a) = lead.gamma[k] * lead.f[k];
      s.loss(a) = lead.gamma[k] * (1.0 - lead.f[k]);
    }
  };
  attach(left, s.D, 0);
  attach(right, s.D + nl, s.D - 1);

  const Mat omega = (0.5 * (s.loss - s.gain)).cast<cplx>().asDiagonal();
  const int M = s.M;
  s.generator.resize(2 * M, 2 * M);
  s.generator.topLeftCorner(M, M) = s.H - kI * omega;
  s.generator.bottomRightCorner(M, M) = s.H + kI * omega;
  s.generator.topRightCorner(M, M) = kI * Mat(s.gain.cast<cplx>().asDiagonal());
  s.generator.bottomLeftCorner(M, M) = kI * Mat(s.loss.cast<cplx>().asDiagonal());
  return s;
}

void ness_correlations(SuperfermionNess& s) {
  const lapack_int n = static_cast<lapack_int>(s.generator.rows());
  Mat a = s.generator;
  Vec w(n);
  Mat vr(n, n);
  cplx dummy;
  // zgeev balances (permute and scale) before the Hessenberg reduction
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, w.data(),
                                        &dummy, 1, vr.data(), n);
  if (info != 0) throw std::runtime_error("zgeev failed with info " + std::to_string(info));

  int pos = 0;
  for (lapack_int k = 0; k < n; ++k) {
    if (std::abs(w(k).imag()) < 1e-12)
      throw std::runtime_error(
          "superfermion eigenvalue " + std::to_string(w(k).real()) +
          " has vanishing imaginary part; occupation is ambiguous (give every lead mode a "
          "nonzero damping rate)");
    if (w(k).imag() > 0.0) ++pos;
  }
  if (2 * pos != n)
    throw std::runtime_error("superfermion spectrum is not split evenly by sign of Im");

  s.eigenvalues = w;
  s.V = vr;
  Eigen::PartialPivLU<Mat> lu(vr);
  const Mat vinv = lu.inverse();
  Mat theta = Mat::Zero(n, n);
  for (lapack_int k = 0; k < n; ++k)
    if (w(k).imag() > 0.0) theta(k, k) = 1.0;
  const Mat P = vr * theta * vinv;
  const Mat C = P.topLeftCorner(s.M, s.M);
  s.hermiticity_error = (C - C.adjoint()).cwiseAbs().maxCoeff();
  s.C = 0.5 * (C + C.adjoint());
}

MesoCurrents lead_currents(const SuperfermionNess& s, const LeadSpec& lead, int offset, int site,
                           bool outflow) {
  MesoCurrents c;
  for (int k = 0; k < static_cast<int>(lead.size()); ++k) {
    const int a = offset + k;
    const double dn = lead.f[k] - s.C(a, a).real();
    c.JP += lead.gamma[k] * dn;
    // -1/2 gamma <kappa c^+ a + h.c.> = -gamma kappa Re <c^+ a>
    c.JE += lead.gamma[k] * lead.eps[k] * dn - lead.gamma[k] * lead.kappa[k] * s.C(a, site).real();
  }
  if (outflow) {
    c.JP = -c.JP;
    c.JE = -c.JE;
  }
  return c;
}

MesoResult meso_currents(const SuperfermionNess& s, const LeadSpec& left, const LeadSpec& right) {
  if (s.C.rows() != s.M) throw std::domain_error("correlations not computed");
  MesoResult r;
  r.left = lead_currents(s, left, s.D, 0, false);
  r.right = lead_currents(s, right, s.D + static_cast<int>(left.size()), s.D - 1, true);
  for (int j = 0; j < s.D; ++j) r.occupations.push_back(s.C(j, j).real());
  return r;
}

MesoResult solve_meso(const Mat& system, const LeadSpec& left, const LeadSpec& right,
                      SuperfermionNess* keep) {
  auto s = build_superfermion_generator(system, left, right);
  ness_correlations(s);
  auto r = meso_currents(s, left, right);
  if (keep) *keep = std::move(s);
  return r;
}

LiouvillianModel dense_lindblad_model(const SuperfermionNess& s) {
  if (s.M > 12) throw std::domain_error("dense Lindblad model limited to 12 modes");
  std::vector<SpMat> c;
  for (int k = 1; k <= s.M; ++k) c.push_back(fermion_annihilator(s.M, k).mat);
  const auto dim = c.front().rows();
  LiouvillianModel m;
  m.convention = DissipatorConvention::standard;
  m.H.resize(dim, dim);
  for (int i = 0; i < s.M; ++i)
    for (int j = 0; j < s.M; ++j)
      if (s.H(i, j) != cplx{0.0, 0.0}) m.H += s.H(i, j) * SpMat(SpMat(c[i].adjoint()) * c[j]);
  for (int k = 0; k < s.M; ++k) {
    if (s.loss(k) > 0.0) m.jumps.push_back({c[k], s.loss(k)});
    if (s.gain(k) > 0.0) m.jumps.push_back({SpMat(c[k].adjoint()), s.gain(k)});
  }
  return m;
}

EngineMetrics engine_metrics(double JP, double JE, double T_L, double T_R, double mu_L,
                             double mu_R) {
  if (!(T_L > 0.0 && T_R > 0.0)) throw std::domain_error("temperatures must be positive");
  EngineMetrics m;
  m.P = (mu_R - mu_L) * JP;
  m.QL = JE - mu_L * JP;
  m.QR = JE - mu_R * JP;
  m.eta_carnot = 1.0 - T_R / T_L;
  m.engine = m.P > 0.0 && m.QL > 0.0;
  m.eta = m.engine ? m.P / m.QL : std::numeric_limits<double>::quiet_NaN();
  return m;
}

}  // namespace qtherm
