#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qtherm/types.hpp"

namespace qtherm {

// Site j (1-based) lives in bit j-1; a set bit is an up spin / occupied mode.
struct SectorBasis {
  int L = 0;
  int N = 0;  // -1 for the full 2^L space
  std::vector<std::uint32_t> states;

  std::size_t dim() const { return states.size(); }
  // Ordinal of a bit string, or -1 when it is not in the basis.
  std::int64_t index(std::uint32_t s) const;
  bool full() const { return N < 0; }

  static SectorBasis full_space(int L);
};

SectorBasis build_sector_basis(int L, int N);

enum class ModelKind { xxz, single_impurity, staggered_field, fermion_chain };
enum class Boundary { open, periodic };

struct ModelSpec {
  ModelKind kind = ModelKind::xxz;
  int L = 2;
  double alpha = 1.0;
  double Delta = 0.0;  // zz anisotropy
  double h = 0.0;      // impurity strength
  double b = 0.0;      // staggered field on odd sites
  double edge = 0.0;   // symmetry-breaking field on site 1
  Boundary boundary = Boundary::open;
  // fermion-chain only
  std::vector<double> eps;
  double t_s = 1.0;
  double U = 0.0;

  int impurity_site() const { return L / 2; }
};

struct SparseOperator {
  SpMat mat;
  bool hermitian = false;
  Eigen::Index dim() const { return mat.rows(); }
};

// Product of single-site factors: 'z' sigma^z, '+' sigma^+, '-' sigma^-, 'n' projector on up.
struct OpTerm {
  cplx coef;
  std::vector<std::pair<int, char>> factors;
};

SparseOperator build_operator(const std::vector<OpTerm>& terms, const SectorBasis& basis,
                              bool hermitian);

SparseOperator build_hamiltonian(const ModelSpec& spec, const SectorBasis& basis);

enum class ObservableKind {
  sz,                  // sigma^z_j
  sz_pair,             // sigma^z_j sigma^z_{j+1}
  local_kinetic,       // sigma^x_j sigma^x_{j+1} + sigma^y_j sigma^y_{j+1}
  kinetic_per_site,    // (1/L) sum over open-chain bonds of the above
  staggered_per_site,  // (1/L) sum_j (-1)^j sigma^z_j
  staggered_extensive, // sum_j (-1)^j sigma^z_j
  gaussian_profile,    // sum_j u_j sigma^z_j, u_j ~ exp(-(j-j0)^2), sum u = 1
  density,             // n_j
};

struct ObservableSpec {
  ObservableKind kind = ObservableKind::sz;
  int site = 1;  // j, or j0 for the Gaussian profile
};

SparseOperator build_observable(const ObservableSpec& o, const SectorBasis& basis);

// Kinetic energy alpha * sum_bonds (xx + yy), boundary aware; the stress tensor in the Kubo formula.
SparseOperator kinetic_energy(const ModelSpec& spec, const SectorBasis& basis);

// alpha(xx + yy) + Delta zz on bond (i, i+1); i = L wraps for periodic chains.
SparseOperator bond_energy(const ModelSpec& spec, const SectorBasis& basis, int i);

struct CurrentOperators {
  std::vector<SparseOperator> spin;    // bond i -> i+1, i = 1..nbonds
  SparseOperator total;                // sum of spin
  SparseOperator per_site;             // total / L
  std::vector<SparseOperator> energy;  // index i-2 holds j^E_i for i = 2..L-1
};

CurrentOperators build_current_operators(const ModelSpec& spec, const SectorBasis& basis);

SparseOperator spin_current(const ModelSpec& spec, const SectorBasis& basis, int i);
SparseOperator energy_current(const ModelSpec& spec, const SectorBasis& basis, int i);

Mat single_particle_matrix(const ModelSpec& spec);

// Jordan-Wigner annihilator for mode k (1-based) on the full 2^L space.
SparseOperator fermion_annihilator(int L, int k);

}  // namespace qtherm
