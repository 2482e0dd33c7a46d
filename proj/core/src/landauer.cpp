#include "qtherm/landauer.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <string>

namespace qtherm {

cplx flat_band_self_energy(double Gamma, double W, double omega) {
  if (std::abs(omega) >= W) return 0.0;
  const double re = Gamma / (2.0 * std::numbers::pi) * std::log(std::abs((W + omega) / (W - omega)));
  return {re, -0.5 * Gamma};
}

double transmission(const TransmissionModel& m, double omega) {
  const auto D = m.H.rows();
  if (D < 1 || m.H.cols() != D) throw std::domain_error("system matrix must be square");
  if (std::abs(omega) >= m.W) return 0.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double w = omega + attempt * 1e-12;
    const cplx sigma = flat_band_self_energy(m.Gamma, m.W, w);
    Mat M = w * Mat::Identity(D, D) - m.H;
    M(0, 0) -= sigma;
    M(D - 1, D - 1) -= sigma;
    Eigen::FullPivLU<Mat> lu(M);
    if (!lu.isInvertible()) continue;
    Vec e = Vec::Zero(D);
    e(D - 1) = 1.0;
    const cplx g1d = lu.solve(e)(0);
    return m.Gamma * m.Gamma * std::norm(g1d);
  }
  throw std::runtime_error("M(omega) singular at omega = " + std::to_string(omega));
}

namespace {

struct Piece {
  double a, b, jp, je, ep, ee;
  double err() const { return ep + ee; }
  bool operator<(const Piece& o) const { return err() < o.err(); }
};

}  // namespace

LbCurrents lb_currents(const TransmissionModel& m, double T_L, double T_R, double mu_L,
                       double mu_R, double tol, int initial) {
  if (!(T_L > 0.0 && T_R > 0.0)) throw std::domain_error("temperatures must be positive");
  if (initial < 1) throw std::domain_error("need at least one initial subinterval");
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  auto window = [&](double w) { return fermi(w, 1.0 / T_L, mu_L) - fermi(w, 1.0 / T_R, mu_R); };
  auto rule = [&](double a, double b) {
    Piece p{a, b, 0.0, 0.0, 0.0, 0.0};
    // max_depth 0: one Kronrod estimate, error from the embedded Gauss rule
    p.jp = GK::integrate([&](double w) { return transmission(m, w) * window(w); }, a, b, 0, 0.0, &p.ep);
    p.je = GK::integrate([&](double w) { return w * transmission(m, w) * window(w); }, a, b, 0, 0.0, &p.ee);
    return p;
  };

  // global bisection: always split the piece with the largest error estimate
  const double target = 2.0 * std::numbers::pi * tol;
  std::priority_queue<Piece> heap;
  double err = 0.0;
  const double h = 2.0 * m.W / initial;
  for (int k = 0; k < initial; ++k) {
    const auto p = rule(-m.W + k * h, k + 1 == initial ? m.W : -m.W + (k + 1) * h);
    err += p.err();
    heap.push(p);
  }
  // slivers at the band edges that cannot be split further
  std::vector<Piece> settled;
  double settled_err = 0.0;
  auto resum = [&] {
    // drift-free total; the heap has no iteration interface, so copy it
    auto copy = heap;
    double e = settled_err;
    for (; !copy.empty(); copy.pop()) e += copy.top().err();
    return e;
  };
  for (int it = 1; err > target && !heap.empty(); ++it) {
    const Piece worst = heap.top();
    if (worst.b - worst.a < 1e-12 * m.W) {
      // the band-edge log singularity stalls the Gauss/Kronrod estimate; a sliver this thin
      // cannot carry more than its own value
      heap.pop();
      Piece frozen = worst;
      frozen.ep = std::min(worst.ep, std::abs(worst.jp));
      frozen.ee = std::min(worst.ee, std::abs(worst.je));
      err += frozen.err() - worst.err();
      settled_err += frozen.err();
      settled.push_back(frozen);
      continue;
    }
    if (it > 20000) {
      if ((err = resum()) <= target) break;
      throw std::runtime_error("Landauer quadrature did not converge; worst subinterval [" +
                               std::to_string(worst.a) + ", " + std::to_string(worst.b) +
                               "] error " + std::to_string(worst.err()));
    }
    heap.pop();
    const double c = 0.5 * (worst.a + worst.b);
    const auto l = rule(worst.a, c), r = rule(c, worst.b);
    err += l.err() + r.err() - worst.err();
    heap.push(l);
    heap.push(r);
    if (it % 256 == 0 || err <= target) err = resum();
  }
  if ((err = resum()) > target)
    throw std::runtime_error("Landauer quadrature stalled at the band edges with error " +
                             std::to_string(err / (2.0 * std::numbers::pi)));
  LbCurrents out;
  // re-sum from scratch so the running error bookkeeping does not leak into the result
  for (const auto& p : settled) heap.push(p);
  for (; !heap.empty(); heap.pop()) {
    out.JP += heap.top().jp;
    out.JE += heap.top().je;
  }
  out.JP /= 2.0 * std::numbers::pi;
  out.JE /= 2.0 * std::numbers::pi;
  return out;
}

std::vector<EnginePoint> lb_engine_sweep(const TransmissionModel& m, const std::vector<double>& mus,
                                         const std::vector<double>& Vs, double T_L, double T_R) {
  std::vector<EnginePoint> out;
  out.reserve(mus.size() * Vs.size());
  for (double mu : mus)
    for (double V : Vs) {
      EnginePoint p;
      p.mu = mu;
      p.V = V;
      p.T_L = T_L;
      p.T_R = T_R;
      const double mu_L = mu - 0.5 * V, mu_R = mu + 0.5 * V;
      const auto c = lb_currents(m, T_L, T_R, mu_L, mu_R);
      p.JP = c.JP;
      p.JE = c.JE;
      p.metrics = engine_metrics(c.JP, c.JE, T_L, T_R, mu_L, mu_R);
      out.push_back(p);
    }
  return out;
}

}  // namespace qtherm
