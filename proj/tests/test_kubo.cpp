#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "oracles.hpp"
#include "qtherm/ethstats.hpp"
#include "qtherm/kubo.hpp"

using namespace qtherm;

namespace {

ModelSpec chain(ModelKind k, int L, double Delta, Boundary bc) {
  ModelSpec s;
  s.kind = k;
  s.L = L;
  s.Delta = Delta;
  s.boundary = bc;
  s.edge = 0.0;
  return s;
}

struct Kubo {
  EnergyEigensystem eig;
  ObservableMatrix J, T;
};

Kubo setup(const ModelSpec& s, const SectorBasis& b) {
  Kubo k;
  k.eig = diagonalize(build_hamiltonian(s, b));
  k.J = to_eigenbasis(kubo_current(s, b), k.eig);
  k.T = to_eigenbasis(kinetic_energy(s, b), k.eig);
  return k;
}

}  // namespace

TEST(Kubo, CurrentIsHalfTheSpinCurrent) {
  auto s = chain(ModelKind::xxz, 6, 0.5, Boundary::periodic);
  const auto b = SectorBasis::full_space(6);
  Mat ref = Mat::Zero(64, 64);
  for (const auto& [i, j] : oracle::bonds(6, true))
    ref += oracle::site_op(6, {{i, 'x'}, {j, 'y'}}) - oracle::site_op(6, {{i, 'y'}, {j, 'x'}});
  EXPECT_LT((Mat(kubo_current(s, b).mat) - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Kubo, SumRuleIsExact) {
  for (auto kind : {ModelKind::xxz, ModelKind::single_impurity, ModelKind::staggered_field})
    for (auto bc : {Boundary::open, Boundary::periodic}) {
      auto s = chain(kind, 8, 0.5, bc);
      s.h = 1.0;
      s.b = 1.0;
      s.edge = 0.1;
      const auto k = setup(s, build_sector_basis(8, 4));
      for (double beta : {0.001, 0.5}) {
        const auto p = conductivity_profile(k.eig, k.J, k.T, 8, beta, 0.05);
        EXPECT_NEAR(p.sum_rule, 0.5, 1e-10) << int(kind) << " beta " << beta;
        EXPECT_NEAR(cumulative_weight(p).back(), 0.5, 1e-10);
      }
    }
}

TEST(Kubo, DrudeIdentitiesForXX) {
  for (int L : {6, 8}) {
    const auto b = build_sector_basis(L, L / 2);
    const auto pbc = setup(chain(ModelKind::xxz, L, 0.0, Boundary::periodic), b);
    const auto d = drude_weights(pbc.eig, pbc.J, pbc.T, L, 0.001);
    const double minus_t = -boltzmann_weights(pbc.eig.E, 0.001).dot(pbc.T.O.diagonal().real());
    EXPECT_NEAR(d.D_L / (minus_t / L), 1.0, 1e-8);
    const auto obc = setup(chain(ModelKind::xxz, L, 0.0, Boundary::open), b);
    const auto o = drude_weights(obc.eig, obc.J, obc.T, L, 0.001);
    EXPECT_LT(std::abs(o.D_L), 1e-10);
    EXPECT_LT(std::abs(o.D_bar), 1e-10);
  }
}

// D_L - D_bar = (<-T> - Duhamel(J, J)) / L, with the Duhamel product integrated numerically
TEST(Kubo, DrudeMatchesDuhamelQuadrature) {
  auto s = chain(ModelKind::staggered_field, 8, 0.5, Boundary::periodic);
  s.b = 1.0;
  s.edge = 0.1;
  const auto b = build_sector_basis(8, 4);
  const Mat H = oracle::restrict_to(oracle::hamiltonian(s), b);
  const Mat J = Mat(kubo_current(s, b).mat);
  const Mat T = Mat(kinetic_energy(s, b).mat);
  const double beta = 0.8;
  const Mat rho = (-beta * H).exp();
  const double Z = rho.trace().real();
  auto integrand = [&](double lam) {
    const Mat a = (-(beta - lam) * H).exp(), c = (-lam * H).exp();
    return (a * J * c * J).trace().real() / Z;
  };
  const double duhamel = boost::math::quadrature::gauss<double, 30>::integrate(integrand, 0.0, beta);
  const double minus_t = -(rho * T).trace().real() / Z;
  const auto k = setup(s, b);
  const auto d = drude_weights(k.eig, k.J, k.T, 8, beta);
  EXPECT_NEAR(d.D_L - d.D_bar, (minus_t - duhamel) / 8.0, 1e-10);
}

TEST(Kubo, FreeFermionPathMatchesManyBodyAtHighTemperature) {
  const int L = 8;
  auto s = chain(ModelKind::xxz, L, 0.0, Boundary::open);
  s.edge = 0.1;
  const auto k = setup(s, SectorBasis::full_space(L));
  const double dw = 0.25;
  const auto mb = conductivity_profile(k.eig, k.J, k.T, L, 1e-6, dw);
  const auto ff = free_fermion_conductivity(s, dw);
  EXPECT_NEAR(ff.sum_rule, 0.5, 1e-12);
  const auto n = std::max(mb.sigma.size(), ff.sigma.size());
  for (std::size_t b = 0; b < n; ++b) {
    const double x = b < mb.sigma.size() ? mb.sigma[b] : 0.0;
    const double y = b < ff.sigma.size() ? ff.sigma[b] : 0.0;
    EXPECT_NEAR(x, y, 1e-5) << "bin " << b;
  }
}

TEST(Kubo, FreeFermionPeriodicIsAllDrude) {
  auto s = chain(ModelKind::xxz, 10, 0.0, Boundary::periodic);
  const auto ff = free_fermion_conductivity(s, 0.1);
  EXPECT_NEAR(ff.D_L, 1.0, 1e-12);
  EXPECT_LT(ff.finite_weight, 1e-12);
  s.Delta = 0.5;
  EXPECT_THROW(free_fermion_conductivity(s, 0.1), std::domain_error);
}

TEST(Kubo, PeakWeight) {
  ConductivityProfile p;
  p.domega = 0.5;
  p.omega = {0.25, 0.75, 1.25};
  p.sigma = {1.0, 3.0, 1.0};
  EXPECT_DOUBLE_EQ(peak_weight_xi(p, 0.5, 1.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(peak_weight_xi(p, 0.0, 2.0, 5.0), 0.0);
  EXPECT_THROW(peak_weight_xi(p, 2.0, 3.0, 0.0), std::domain_error);
}

TEST(Kubo, Errors) {
  auto s = chain(ModelKind::xxz, 4, 0.5, Boundary::open);
  const auto k = setup(s, build_sector_basis(4, 2));
  EXPECT_THROW(conductivity_profile(k.eig, k.J, k.T, 4, 0.0, 0.1), std::domain_error);
  EXPECT_THROW(conductivity_profile(k.eig, k.J, k.T, 4, 1.0, 0.0), std::domain_error);
}
