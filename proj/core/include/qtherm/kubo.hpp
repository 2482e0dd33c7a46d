#pragma once

#include <vector>

#include "qtherm/spectra.hpp"

namespace qtherm {

struct DrudeWeights {
  double D_L = 0.0;
  double D_bar = 0.0;
};

struct ConductivityProfile {
  double beta = 0.0;
  double domega = 0.0;
  int L = 0;
  bool normalized = false;
  std::vector<double> omega;  // bin centres
  std::vector<double> sigma;  // Re sigma per bin, divided by pi<-T>/L when normalized
  double D_L = 0.0;
  double D_bar = 0.0;
  double minus_T = 0.0;        // <-T>
  double finite_weight = 0.0;  // raw integral of the finite-frequency part over omega > 0
  // (L / pi<-T>) (pi D_L / 2 + finite_weight); 1/2 when the f-sum rule holds
  double sum_rule = 0.0;
};

// Current of S^z = sigma^z / 2, i.e. half the total spin current. Paired with the kinetic energy
// alpha * sum (xx + yy) as stress tensor it satisfies the f-sum rule exactly.
SparseOperator kubo_current(const ModelSpec& spec, const SectorBasis& basis);

// J from kubo_current and T from kinetic_energy, both in the eigenbasis of eig.
ConductivityProfile conductivity_profile(const EnergyEigensystem& eig, const ObservableMatrix& J,
                                         const ObservableMatrix& T, int L, double beta,
                                         double domega, bool normalize = true);

DrudeWeights drude_weights(const EnergyEigensystem& eig, const ObservableMatrix& J,
                           const ObservableMatrix& T, int L, double beta);

// Normalized profile of a Delta = 0 chain from its single-particle problem, leading order in beta.
ConductivityProfile free_fermion_conductivity(const ModelSpec& spec, double domega);

double peak_weight_xi(const ConductivityProfile& p, double omega_lo, double omega_hi,
                      double baseline);

// Cumulative normalized weight per bin, starting from the Drude half-weight.
std::vector<double> cumulative_weight(const ConductivityProfile& p);

}  // namespace qtherm
