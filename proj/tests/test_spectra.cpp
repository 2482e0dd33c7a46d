#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qtherm/spectra.hpp"

using namespace qtherm;

namespace {

RVec sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return Eigen::Map<RVec>(v.data(), v.size());
}

}  // namespace

TEST(Blas, SelfCheckPasses) { EXPECT_TRUE(blas_self_check()); }

TEST(Diagonalize, ReconstructsMatrix) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Mat A(60, 60);
  for (Eigen::Index i = 0; i < 60; ++i)
    for (Eigen::Index j = 0; j < 60; ++j) A(i, j) = cplx(g(rng), g(rng));
  A = (A + A.adjoint()).eval();
  const auto e = diagonalize(A);
  EXPECT_TRUE(std::is_sorted(e.E.data(), e.E.data() + e.E.size()));
  EXPECT_LT((e.U * e.E.cast<cplx>().asDiagonal() * e.U.adjoint() - A).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_LT((e.U.adjoint() * e.U - Mat::Identity(60, 60)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(e.bandwidth, e.E(59) - e.E(0), 1e-14);
  const RVec ev = eigenvalues(SparseOperator{A.sparseView(), true});
  EXPECT_LT((ev - e.E).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Diagonalize, RejectsNonHermitian) {
  Mat A = Mat::Zero(2, 2);
  A(0, 1) = 1.0;
  EXPECT_THROW(diagonalize(A), std::domain_error);
}

TEST(GapRatio, PoissonAndGoeReferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> levels(4000);
  for (double& x : levels) x = u(rng);
  // uncorrelated levels: 2 ln 2 - 1
  EXPECT_NEAR(gap_ratio_stats(sorted(levels)).r_mean, 2.0 * std::log(2.0) - 1.0, 0.015);

  std::normal_distribution<double> g;
  const int n = 1200;
  RMat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = g(rng) * (i == j ? std::sqrt(2.0) : 1.0);
  Eigen::SelfAdjointEigenSolver<RMat> es(A, Eigen::EigenvaluesOnly);
  // large-N GOE value
  EXPECT_NEAR(gap_ratio_stats(es.eigenvalues()).r_mean, 0.5307, 0.015);
}

TEST(GapRatio, HandWorkedSpectrum) {
  // spacings alternate 1, 2: every ratio is 1/2
  std::vector<double> e{0.0};
  for (int k = 0; k < 200; ++k) e.push_back(e.back() + (k % 2 ? 2.0 : 1.0));
  const auto g = gap_ratio_stats(sorted(e), 1.0);
  EXPECT_NEAR(g.r_mean, 0.5, 1e-14);
  EXPECT_EQ(g.dropped, 0u);
  EXPECT_DOUBLE_EQ(g.fraction_used, 1.0);
}

TEST(GapRatio, Errors) {
  EXPECT_THROW(gap_ratio_stats(RVec::LinSpaced(50, 0, 1)), std::domain_error);
  EXPECT_THROW(gap_ratio_stats(RVec::LinSpaced(500, 0, 1), 0.0), std::domain_error);
}

TEST(FormFactor, DirectSum) {
  RVec E(3);
  E << 0.0, 1.0, 2.5;
  const auto K = spectral_form_factor(E, {0.0, 0.7});
  EXPECT_NEAR(K[0], 9.0, 1e-14);
  const cplx z = 1.0 + std::exp(cplx(0, -0.7)) + std::exp(cplx(0, -1.75));
  EXPECT_NEAR(K[1], std::norm(z), 1e-13);
}

TEST(Thermal, TwoLevelSystem) {
  RVec E(2);
  E << -1.0, 1.0;
  const double beta = 0.7;
  EXPECT_NEAR(thermal_energy(E, beta), -std::tanh(beta), 1e-15);
  EXPECT_NEAR(thermal_energy_spread(E, beta), 1.0 / std::cosh(beta), 1e-15);
  const auto p = boltzmann_weights(E, beta);
  EXPECT_NEAR(p(0), 1.0 / (1.0 + std::exp(-2 * beta)), 1e-15);
  EXPECT_NEAR(beta_for_energy(E, -std::tanh(beta)), beta, 1e-10);
  EXPECT_THROW(beta_for_energy(E, 0.5), std::domain_error);
  EXPECT_THROW(boltzmann_weights(E, -1.0), std::domain_error);
}

TEST(Thermal, QuantitiesAgreeWithTrace) {
  ModelSpec s;
  s.kind = ModelKind::staggered_field;
  s.L = 6;
  s.Delta = 0.5;
  s.b = 1.0;
  s.edge = 0.1;
  const Mat H = oracle::hamiltonian(s);
  const auto eig = diagonalize(H);
  const double beta = 0.4;
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const RVec w = (-beta * es.eigenvalues().array()).exp();
  const double Z = w.sum();
  const auto t = thermal_quantities(eig, nullptr, beta);
  EXPECT_NEAR(t.log_z, std::log(Z), 1e-12);
  EXPECT_NEAR(t.energy, w.dot(es.eigenvalues()) / Z, 1e-12);
}

TEST(Thermal, MicrocanonicalWindow) {
  RVec E = RVec::LinSpaced(11, 0.0, 10.0);
  RVec O = E * 2.0;
  // window 0.2 of bandwidth 10 -> +-1 around 5
  EXPECT_NEAR(microcanonical_average(O, E, 5.0, 0.2), 10.0, 1e-14);
  EXPECT_THROW(microcanonical_average(O, E, 5.5, 0.01), std::domain_error);
}
