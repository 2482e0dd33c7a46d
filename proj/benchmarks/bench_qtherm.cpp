#include <benchmark/benchmark.h>

#include "qtherm/dynamics.hpp"
#include "qtherm/kubo.hpp"
#include "qtherm/landauer.hpp"
#include "qtherm/lindblad.hpp"
#include "qtherm/mesoleads.hpp"

using namespace qtherm;

namespace {

ModelSpec staggered(int L) {
  ModelSpec s;
  s.kind = ModelKind::staggered_field;
  s.L = L;
  s.Delta = 0.5;
  s.b = 1.0;
  s.edge = 0.1;
  return s;
}

Mat chain(int D) {
  Mat h = Mat::Zero(D, D);
  for (int j = 0; j + 1 < D; ++j) h(j, j + 1) = h(j + 1, j) = -1.0;
  return h;
}

}  // namespace

static void BM_HamiltonianBuild(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto s = staggered(L);
  const auto b = build_sector_basis(L, L / 2);
  for (auto _ : st) benchmark::DoNotOptimize(build_hamiltonian(s, b));
  st.counters["dim"] = double(b.dim());
}
BENCHMARK(BM_HamiltonianBuild)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Diagonalize(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto s = staggered(L);
  const auto b = build_sector_basis(L, L / 2);
  const Mat H(build_hamiltonian(s, b).mat);
  for (auto _ : st) benchmark::DoNotOptimize(diagonalize(H));
  st.counters["dim"] = double(b.dim());
}
BENCHMARK(BM_Diagonalize)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_ConductivityProfile(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto s = staggered(L);
  const auto b = build_sector_basis(L, L / 2);
  const auto eig = diagonalize(build_hamiltonian(s, b));
  const auto J = to_eigenbasis(kubo_current(s, b), eig);
  const auto T = to_eigenbasis(kinetic_energy(s, b), eig);
  for (auto _ : st) benchmark::DoNotOptimize(conductivity_profile(eig, J, T, L, 0.1, 0.05));
}
BENCHMARK(BM_ConductivityProfile)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_KrylovStep(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto full = SectorBasis::full_space(L);
  const auto H = build_hamiltonian(staggered(L), full);
  Vec psi = Vec::Ones(full.dim()).normalized();
  for (auto _ : st) benchmark::DoNotOptimize(krylov_evolve(H, psi, 0.5));
}
BENCHMARK(BM_KrylovStep)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_NessSparse(benchmark::State& st) {
  const int D = static_cast<int>(st.range(0));
  ModelSpec s;
  s.kind = ModelKind::xxz;
  s.L = D;
  s.Delta = 1.0;
  s.edge = 0.0;
  const auto model = boundary_driving_model(s, 1.0, 0.1);
  for (auto _ : st) benchmark::DoNotOptimize(solve_ness(model));
}
BENCHMARK(BM_NessSparse)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_Superfermion(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const auto left = discretize_lead(8.0, 4.0, L, 0.2, 1.0 / 1.2, 0.5, 1.0);
  const auto right = discretize_lead(8.0, 4.0, L, 0.2, 1.0 / 0.4, -0.5, 1.0);
  const Mat h = chain(2);
  for (auto _ : st) benchmark::DoNotOptimize(solve_meso(h, left, right));
}
BENCHMARK(BM_Superfermion)->Arg(25)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_LandauerQuadrature(benchmark::State& st) {
  TransmissionModel m;
  m.H = chain(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(lb_currents(m, 1.2, 0.4, 0.5, -0.5));
}
BENCHMARK(BM_LandauerQuadrature)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
