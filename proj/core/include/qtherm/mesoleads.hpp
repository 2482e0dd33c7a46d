#pragma once

#include <vector>

#include "qtherm/lindblad.hpp"
#include "qtherm/types.hpp"

namespace qtherm {

double fermi(double e, double beta, double mu);

struct LeadSpec {
  std::vector<double> eps;      // ascending
  std::vector<double> spacing;  // interval width of each mode
  std::vector<double> gamma;    // damping rate, equal to the spacing
  std::vector<double> kappa;    // coupling to the attached system site
  std::vector<double> f;        // Fermi factor of each mode
  double beta = 1.0;
  double mu = 0.0;
  double W = 0.0;
  double W_star = 0.0;
  double Gamma = 0.0;
  int L_lin = 0;
  int L_log = 0;  // total over both sides
  std::size_t size() const { return eps.size(); }
};

// L_lin modes at bin centres of [-W*, W*]; floor(L_log/2) log-spaced modes per side.
// L * log_fraction must be an integer; an odd log count puts the spare mode in the linear window.
LeadSpec discretize_lead(double W, double W_star, int L, double log_fraction, double beta,
                         double mu, double Gamma);

// Sum of Lorentzians seen by the attached site.
double effective_spectral_density(const LeadSpec& lead, double omega);

// Mode ordering: system sites 0..D-1, then left lead, then right lead.
struct SuperfermionNess {
  int D = 0;
  int M = 0;
  Mat H;                 // M x M single-particle Hamiltonian of system plus leads
  RVec gain, loss;       // diagonals of Gamma_+ and Gamma_-
  Mat generator;         // [[H - i Omega, i Gamma_+], [i Gamma_-, H + i Omega]]
  Vec eigenvalues;
  Mat V;
  Mat C;                 // C(j, i) = <d_i^+ d_j>
  double hermiticity_error = 0.0;  // max |C - C^+| before symmetrizing
  int left_offset() const { return D; }
  int right_offset(int n_left) const { return D + n_left; }
};

SuperfermionNess build_superfermion_generator(const Mat& system, const LeadSpec& left,
                                              const LeadSpec& right);

// Fills eigenvalues, V and C of gen. Throws when an eigenvalue has |Im| < 1e-12.
void ness_correlations(SuperfermionNess& gen);

struct MesoCurrents {
  double JP = 0.0;
  double JE = 0.0;
};

// Currents entering through a lead that couples to system site `site` (0-based) and whose modes
// start at `offset`. For the right lead the sign is flipped so both read left to right.
MesoCurrents lead_currents(const SuperfermionNess& s, const LeadSpec& lead, int offset, int site,
                           bool outflow);

struct MesoResult {
  MesoCurrents left, right;
  std::vector<double> occupations;  // system sites
};

MesoResult meso_currents(const SuperfermionNess& s, const LeadSpec& left, const LeadSpec& right);

// Convenience: build, solve and measure.
MesoResult solve_meso(const Mat& system, const LeadSpec& left, const LeadSpec& right,
                      SuperfermionNess* keep = nullptr);

// Many-body Lindblad problem with the same H, gain and loss (standard convention), on the
// 2^M Fock space with Jordan-Wigner modes in the same order. Only for M <= 12.
LiouvillianModel dense_lindblad_model(const SuperfermionNess& s);

struct EngineMetrics {
  double P = 0.0;
  double QL = 0.0;
  double QR = 0.0;
  double eta = 0.0;
  double eta_carnot = 0.0;
  bool engine = false;  // P > 0 and QL > 0; eta is NaN otherwise
};

EngineMetrics engine_metrics(double JP, double JE, double T_L, double T_R, double mu_L,
                             double mu_R);

}  // namespace qtherm
