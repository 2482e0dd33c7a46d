#pragma once

#include <optional>
#include <vector>

#include "qtherm/spinops.hpp"
#include "qtherm/types.hpp"

namespace qtherm {

struct EnergyEigensystem {
  RVec E;  // ascending
  Mat U;   // columns are eigenstates
  double bandwidth = 0.0;
  Eigen::Index dim() const { return E.size(); }
};

// Hermitian operator rotated into an energy eigenbasis.
struct ObservableMatrix {
  Mat O;
  RVec E;
  bool extensive = false;
  Eigen::Index dim() const { return O.rows(); }
};

struct GapStatistics {
  double r_mean = 0.0;
  std::vector<std::pair<double, double>> histogram;  // (s, P(s))
  double fraction_used = 0.0;
  std::size_t dropped = 0;  // near-degenerate spacings removed
};

struct ThermalAverages {
  double log_z = 0.0;
  double energy = 0.0;
  double mean = 0.0;      // <O>, 0 when no observable given
  double variance = 0.0;  // <O^2> - <O>^2
};

// Compares a BLAS-backed product with Eigen's own kernel. Some OpenBLAS builds pick a broken
// kernel on recent AVX-512 parts; OPENBLAS_CORETYPE=Haswell (or SkylakeX) avoids it.
bool blas_self_check();

// Throws through diagonalize when blas_self_check fails.
EnergyEigensystem diagonalize(const SparseOperator& H);
EnergyEigensystem diagonalize(const Mat& H);
RVec eigenvalues(const SparseOperator& H);

GapStatistics gap_ratio_stats(const RVec& E, double keep_fraction = 0.8, int unfold_window = 20);

std::vector<double> spectral_form_factor(const RVec& E, const std::vector<double>& times);

RVec boltzmann_weights(const RVec& E, double beta);
ThermalAverages thermal_quantities(const EnergyEigensystem& eig, const ObservableMatrix* O,
                                   double beta);
double thermal_energy(const RVec& E, double beta);
// Canonical energy spread sqrt(<H^2> - <H>^2).
double thermal_energy_spread(const RVec& E, double beta);
// Inverse of thermal_energy by bisection; target must lie in (E_min, mean(E)].
double beta_for_energy(const RVec& E, double target);

double microcanonical_average(const RVec& O_diag, const RVec& E, double E_star, double window);

}  // namespace qtherm
