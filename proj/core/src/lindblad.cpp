#include "qtherm/lindblad.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <Eigen/UmfPackSupport>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace qtherm {

namespace {

double conv_factor(DissipatorConvention c) { return c == DissipatorConvention::boundary ? 2.0 : 1.0; }

SpMat sparse_identity(Eigen::Index d) {
  SpMat I(d, d);
  I.setIdentity();
  return I;
}

// Charge carried by op (popcount(row) - popcount(col)), if it is the same for every entry.
std::optional<int> charge(const SpMat& op) {
  std::optional<int> q;
  for (int k = 0; k < op.outerSize(); ++k)
    for (SpMat::InnerIterator it(op, k); it; ++it) {
      if (it.value() == cplx{0.0, 0.0}) continue;
      const int c = std::popcount(static_cast<unsigned>(it.row())) -
                    std::popcount(static_cast<unsigned>(it.col()));
      if (q && *q != c) return std::nullopt;
      q = c;
    }
  return q ? q : std::optional<int>(0);
}

}  // namespace

LiouvillianModel boundary_driving_model(const ModelSpec& spec, double gamma, double mu) {
  if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");
  if (mu < 0.0 || mu > 1.0) throw std::domain_error("mu must lie in [0, 1]");
  const auto full = SectorBasis::full_space(spec.L);
  LiouvillianModel m;
  m.H = build_hamiltonian(spec, full).mat;
  m.convention = DissipatorConvention::boundary;
  auto op = [&](int site, char f) { return build_operator({{1.0, {{site, f}}}}, full, false).mat; };
  m.jumps.push_back({op(1, '+'), gamma * (1.0 + mu)});
  m.jumps.push_back({op(1, '-'), gamma * (1.0 - mu)});
  m.jumps.push_back({op(spec.L, '+'), gamma * (1.0 - mu)});
  m.jumps.push_back({op(spec.L, '-'), gamma * (1.0 + mu)});
  return m;
}

SpMat build_liouvillian_sparse(const LiouvillianModel& model) {
  const auto d = model.dim();
  const SpMat I = sparse_identity(d);
  const SpMat Ht = SpMat(model.H.transpose());
  SpMat W = -kI * (SpMat(Eigen::kroneckerProduct(I, model.H)) -
                   SpMat(Eigen::kroneckerProduct(Ht, I)));
  const double c = conv_factor(model.convention);
  for (const auto& j : model.jumps) {
    if (j.rate < 0.0) throw std::domain_error("negative jump rate");
    if (j.rate == 0.0) continue;
    const SpMat LdL = SpMat(j.op.adjoint()) * j.op;
    const SpMat LdLt = SpMat(LdL.transpose());
    const SpMat Lc = SpMat(j.op.conjugate());
    SpMat D = SpMat(Eigen::kroneckerProduct(Lc, j.op)) -
              0.5 * SpMat(Eigen::kroneckerProduct(I, LdL)) -
              0.5 * SpMat(Eigen::kroneckerProduct(LdLt, I));
    W += (c * j.rate) * D;
  }
  W.prune(cplx{0.0, 0.0}, 1e-300);
  W.makeCompressed();
  return W;
}

Mat build_liouvillian_matrix(const LiouvillianModel& model) {
  return Mat(build_liouvillian_sparse(model));
}

Mat apply_dissipator(const LiouvillianModel& model, const Mat& rho, std::size_t first_jump,
                     std::size_t n_jumps) {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  const double c = conv_factor(model.convention);
  for (std::size_t k = first_jump; k < first_jump + n_jumps && k < model.jumps.size(); ++k) {
    const auto& j = model.jumps[k];
    const Mat L = Mat(j.op);
    const Mat LdL = L.adjoint() * L;
    out += c * j.rate * (L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL));
  }
  return out;
}

Mat apply_liouvillian(const LiouvillianModel& model, const Mat& rho) {
  const Mat H = Mat(model.H);
  return -kI * (H * rho - rho * H) + apply_dissipator(model, rho, 0, model.jumps.size());
}

namespace {

NessSolution finish(const Mat& rho_raw, const SpMat& W) {
  NessSolution s;
  const auto d = rho_raw.rows();
  s.rho = 0.5 * (rho_raw + rho_raw.adjoint());
  const Eigen::Map<const Vec> v(s.rho.data(), d * d);
  s.residual = (W * v).cwiseAbs().maxCoeff();
  s.trace_error = std::abs(s.rho.trace() - 1.0);
  s.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Mat>(s.rho, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .minCoeff();
  return s;
}

}  // namespace

NessSolution solve_ness(const Mat& W, Eigen::Index d) {
  if (W.rows() != d * d || W.cols() != d * d) throw std::domain_error("W is not d^2 x d^2");
  Mat Wt = W;
  Wt.row(0).setZero();
  for (Eigen::Index k = 0; k < d; ++k) Wt(0, k + d * k) = 1.0;
  Vec rhs = Vec::Zero(d * d);
  rhs(0) = 1.0;
  Eigen::PartialPivLU<Mat> lu(Wt);
  if (lu.rcond() < 1e-15)
    throw std::runtime_error("NESS linear system is singular; the steady state is not unique "
                             "(check for conserved quantities / symmetries)");
  Vec x = lu.solve(rhs);
  x += lu.solve(rhs - Wt * x);
  const Mat rho = Eigen::Map<Mat>(x.data(), d, d);
  return finish(rho, W.sparseView());
}

NessSolution solve_ness(const LiouvillianModel& model) {
  const auto d = model.dim();
  const SpMat W = build_liouvillian_sparse(model);

  bool sectored = charge(model.H) == std::optional<int>(0);
  for (const auto& j : model.jumps) sectored = sectored && charge(j.op).has_value();

  // vec index k = a + d b holds rho(a, b)
  std::vector<Eigen::Index> keep;
  std::vector<Eigen::Index> pos(d * d, -1);
  for (Eigen::Index b = 0; b < d; ++b)
    for (Eigen::Index a = 0; a < d; ++a)
      if (!sectored || std::popcount(static_cast<unsigned>(a)) ==
                           std::popcount(static_cast<unsigned>(b)))
        keep.push_back(a + d * b);
  std::sort(keep.begin(), keep.end());
  for (std::size_t k = 0; k < keep.size(); ++k) pos[keep[k]] = static_cast<Eigen::Index>(k);
  const auto n = static_cast<Eigen::Index>(keep.size());

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(W.nonZeros() + d);
  for (int c = 0; c < W.outerSize(); ++c)
    for (SpMat::InnerIterator it(W, c); it; ++it) {
      const auto r = pos[it.row()], cc = pos[it.col()];
      if (r <= 0 || cc < 0) continue;  // row 0 becomes the trace constraint
      trip.emplace_back(r, cc, it.value());
    }
  for (Eigen::Index k = 0; k < d; ++k) trip.emplace_back(0, pos[k + d * k], 1.0);
  SpMat Wt(n, n);
  Wt.setFromTriplets(trip.begin(), trip.end());
  Wt.makeCompressed();

  Eigen::UmfPackLU<SpMat> lu(Wt);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("NESS linear system is singular; the steady state is not unique "
                             "(check for conserved quantities / symmetries)");
  Vec rhs = Vec::Zero(n);
  rhs(0) = 1.0;
  Vec x = lu.solve(rhs);
  const Vec r = rhs - Wt * x;
  x += lu.solve(r);

  Mat rho = Mat::Zero(d, d);
  for (Eigen::Index k = 0; k < n; ++k) rho(keep[k] % d, keep[k] / d) = x(k);
  return finish(rho, W);
}

NessProfile ness_observables(const NessSolution& sol, const ModelSpec& spec, double gamma,
                             double mu) {
  const int D = spec.L;
  const auto full = SectorBasis::full_space(D);
  if (sol.rho.rows() != static_cast<Eigen::Index>(full.dim()))
    throw std::domain_error("density matrix does not match chain length");
  NessProfile p;
  auto expect = [&](const SpMat& op) {
    cplx s = 0.0;
    for (int c = 0; c < op.outerSize(); ++c)
      for (SpMat::InnerIterator it(op, c); it; ++it) s += it.value() * sol.rho(it.col(), it.row());
    return s.real();
  };
  for (int i = 1; i <= D; ++i)
    p.sz.push_back(expect(build_observable({ObservableKind::sz, i}, full).mat));
  ModelSpec open = spec;
  open.boundary = Boundary::open;
  for (int i = 1; i < D; ++i) p.bond.push_back(expect(spin_current(open, full, i).mat));
  p.j_left = 4.0 * gamma * (mu - p.sz.front());
  p.j_right = 4.0 * gamma * (mu + p.sz.back());

  const auto model = boundary_driving_model(spec, gamma, mu);
  const SpMat z1 = build_observable({ObservableKind::sz, 1}, full).mat;
  const SpMat zD = build_observable({ObservableKind::sz, D}, full).mat;
  const Mat dl = apply_dissipator(model, sol.rho, 0, 2);
  const Mat dr = apply_dissipator(model, sol.rho, 2, 2);
  p.j_left_direct = (Mat(z1) * dl).trace().real();
  p.j_right_direct = -(Mat(zD) * dr).trace().real();

  const double ref = p.bond.empty() ? p.j_left : p.bond.front();
  p.max_deviation = std::max(std::abs(p.j_left - ref), std::abs(p.j_right - ref));
  for (double j : p.bond) p.max_deviation = std::max(p.max_deviation, std::abs(j - ref));
  return p;
}

Mat evolve_dense(const LiouvillianModel& model, const Mat& rho0, double t) {
  const auto d = model.dim();
  const Mat W = build_liouvillian_matrix(model);
  const Mat P = (W * t).exp();
  Vec v = Eigen::Map<const Vec>(rho0.data(), d * d);
  Vec out = P * v;
  return Eigen::Map<Mat>(out.data(), d, d);
}

TransportFit transport_exponent_fit(const std::vector<std::pair<double, double>>& currents,
                                    int trim, const std::vector<double>& gradients) {
  if (currents.size() < 3) throw std::domain_error("transport fit needs at least three sizes");
  if (!gradients.empty() && gradients.size() != currents.size())
    throw std::domain_error("one gradient per size required");
  const auto n = static_cast<Eigen::Index>(currents.size());
  RMat A(n, 2);
  RVec y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double len = currents[k].first - 2.0 * trim;
    double j = currents[k].second;
    if (!gradients.empty()) j /= 2.0 * gradients[k];
    if (!(j > 0.0) || !(len > 0.0)) throw std::domain_error("currents must be positive");
    A(k, 0) = 1.0;
    A(k, 1) = -std::log(len);
    y(k) = std::log(j);
  }
  const RVec c = A.colPivHouseholderQr().solve(y);
  return {c(1), std::exp(c(0))};
}

}  // namespace qtherm
