#pragma once

#include <cstdint>
#include <vector>

#include "qtherm/ethstats.hpp"
#include "qtherm/spectra.hpp"

namespace qtherm {

enum class Provenance { canonical_exact, eth_reconstructed, eigenstate, typicality };

struct CorrelationSeries {
  std::vector<double> t;
  std::vector<cplx> value;
  std::vector<double> stderr_;  // empty unless sampled
  Provenance source = Provenance::canonical_exact;
};

CorrelationSeries f2_canonical(const EnergyEigensystem& eig, const ObservableMatrix& Om,
                               double beta, const std::vector<double>& times);

// Same double sum with arbitrary eigenstate weights (diagonal ensemble of a pure state).
CorrelationSeries f2_weighted(const ObservableMatrix& Om, const RVec& weights,
                              const std::vector<double>& times);

// Window-averaged eigenstate variance sum_{m != n} |O_nm|^2 around E_star.
double eigenstate_variance(const ObservableMatrix& Om, double E_star, double window);

// Shape profile |f|^2 (e.g. from offdiag_f2_profile); result satisfies Re F2(0) = variance.
CorrelationSeries eth_reconstruct(const FrequencyProfile& f2, double beta, double variance,
                                  const std::vector<double>& times);

// S+ = 4 pi cosh(beta w / 2)|f|^2 and S- = 4 pi sinh(beta w / 2)|f|^2 on the profile bins.
std::pair<FrequencyProfile, FrequencyProfile> eth_spectral_functions(const FrequencyProfile& f2,
                                                                     double beta);

// Binned symmetric/antisymmetric spectral functions of sum_nm w_n |O_nm|^2 delta(w - E_m + E_n).
std::pair<FrequencyProfile, FrequencyProfile> spectral_functions(const ObservableMatrix& Om,
                                                                 const RVec& weights,
                                                                 double domega, double omega_max);

double fdt_beta_fit(const FrequencyProfile& Splus, const FrequencyProfile& Sminus,
                    double omega_max_fit);

struct QfiReport {
  std::vector<double> beta;
  std::vector<double> F_gibbs;
  std::vector<double> F_eth;
  std::vector<double> f_gibbs;  // per site
  std::vector<double> f_eth;
};

// window > 0: eigenstate variances averaged over window * bandwidth around E(beta);
// window <= 0: eigenstate variances averaged with the Gibbs weights.
QfiReport qfi(const EnergyEigensystem& eig, const ObservableMatrix& Om,
              const std::vector<double>& betas, int L, double window = 0.0);

std::vector<double> otoc_exact(const EnergyEigensystem& eig, const ObservableMatrix& Om,
                               double beta, const std::vector<double>& times);

std::vector<double> otoc_eth_uncorrelated(const CorrelationSeries& F2);

struct KrylovStats {
  int steps = 0;
  double error_bound = 0.0;  // accumulated a-posteriori estimate
};

Vec krylov_evolve(const SparseOperator& H, const Vec& psi, double t, int m = 30,
                  double dt_max = 0.5, KrylovStats* stats = nullptr);

struct OtocSamples {
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> stderr_;
  int samples = 0;
};

OtocSamples otoc_typicality(const SparseOperator& H, const SparseOperator& O,
                            const std::vector<double>& times, int n_samples, std::uint64_t seed,
                            int m = 30, double rel_stderr_stop = 0.01);

// First time where the +-half running average reaches eps times the long-time value.
double saturation_time(const std::vector<double>& t, const std::vector<double>& c,
                       double eps = 0.99, double half_window = 0.5);

struct DrivenRun {
  double E_prep = 0.0;
  double dE2 = 0.0;  // energy variance of the prepared state
  Vec psi_prep;
  std::vector<double> times;  // measured from t_prep
  std::vector<std::vector<double>> series;  // one per observable
  double dt = 0.0;
  double norm_drift = 0.0;
};

// H(t) = H + a sin(w0 t) V for t < t_prep, then free evolution for t_relax, RK4 throughout.
DrivenRun driven_relaxation(const SparseOperator& H, const SparseOperator& V, const Vec& psi0,
                            double a, double omega0, double t_prep, double t_relax,
                            const std::vector<SparseOperator>& observables, double dt = 0.01,
                            double record_every = 0.1);

}  // namespace qtherm
