#pragma once

#include <cstdint>
#include <vector>

#include "qtherm/spectra.hpp"

namespace qtherm {

ObservableMatrix to_eigenbasis(const SparseOperator& O, const EnergyEigensystem& eig,
                               bool extensive = false);
ObservableMatrix to_eigenbasis(const Mat& O, const EnergyEigensystem& eig, bool extensive = false);

struct DiagonalProfile {
  std::vector<double> eps;  // (E_n - E_min) / bandwidth
  std::vector<double> O_nn;
  std::vector<std::pair<double, double>> coarse;  // binned average over eps
  double ete = 0.0;  // mean |O_nn - O_{n+1,n+1}| over the central fraction
};

DiagonalProfile diagonal_profile(const ObservableMatrix& Om, double central_fraction = 0.2,
                                 double coarse_width = 0.02);

struct FrequencyProfile {
  std::vector<double> omega;
  std::vector<double> value;
  std::vector<std::size_t> count;
  double E_star = 0.0;
  double window = 0.0;
  double domega = 0.0;
};

// Bin means of |O_nm|^2 against omega = |E_m - E_n| over pairs n < m with (E_n + E_m)/2
// inside window * bandwidth around E_star. Bins holding only exact zeros are omitted.
FrequencyProfile offdiag_f2_profile(const ObservableMatrix& Om, double E_star,
                                    double window = 0.05, double domega = 0.05);

// mean|O_nm|^2 / (mean|O_nm|)^2 per bin; bins with fewer than min_count pairs are dropped.
FrequencyProfile gamma_ratio_profile(const ObservableMatrix& Om, double E_star,
                                     double window = 0.05, double domega = 0.05,
                                     std::size_t min_count = 10);

struct BandedTest {
  std::size_t dim = 0;
  std::size_t centre = 0;         // eigenbasis index of the centre state
  RVec spectrum;                  // eigenvalues of the banded sub-matrix
  RVec randomized_spectrum;       // same after symmetric sign randomization
  double r_mean = 0.0;
  double r_mean_randomized = 0.0;
  bool below_floor = false;       // r_mean < 0.45
};

Mat banded_submatrix(const ObservableMatrix& Om, double E_star, double window, double omega_c,
                     std::size_t* centre = nullptr);
Mat randomize_signs(const Mat& A, std::uint64_t seed);

BandedTest banded_goe_test(const ObservableMatrix& Om, double E_star, double window,
                           double omega_c, std::uint64_t seed);

// Mean gap ratio of a whole spectrum, no truncation or minimum size.
double mean_gap_ratio(const RVec& E);

// m4 / m2^2 of the centred values; 2 for a semicircle, 3 for a Gaussian.
double fourth_moment_ratio(const RVec& x);

// (centre, density) pairs; width <= 0 selects Freedman-Diaconis.
std::vector<std::pair<double, double>> histogram(const RVec& x, double width = 0.0);

}  // namespace qtherm
