#include "qtherm/spinops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qtherm {

std::int64_t SectorBasis::index(std::uint32_t s) const {
  if (full()) return s < states.size() ? static_cast<std::int64_t>(s) : -1;
  auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || *it != s) return -1;
  return it - states.begin();
}

SectorBasis SectorBasis::full_space(int L) {
  if (L < 1 || L > 24) throw std::domain_error("full space needs 1 <= L <= 24");
  SectorBasis b;
  b.L = L;
  b.N = -1;
  b.states.resize(std::size_t{1} << L);
  for (std::uint32_t s = 0; s < b.states.size(); ++s) b.states[s] = s;
  return b;
}

SectorBasis build_sector_basis(int L, int N) {
  if (L < 1 || L > 30 || N < 0 || N > L)
    throw std::domain_error("sector basis needs 0 <= N <= L <= 30, got L=" + std::to_string(L) +
                            " N=" + std::to_string(N));
  SectorBasis b;
  b.L = L;
  b.N = N;
  if (N == 0) {
    b.states.push_back(0);
    return b;
  }
  const std::uint64_t limit = std::uint64_t{1} << L;
  std::uint64_t s = (std::uint64_t{1} << N) - 1;
  while (s < limit) {
    b.states.push_back(static_cast<std::uint32_t>(s));
    // Gosper: next integer with the same popcount
    std::uint64_t c = s & (~s + 1);
    std::uint64_t r = s + c;
    s = (((r ^ s) >> 2) / c) | r;
  }
  return b;
}

namespace {

// Applies the product F1 F2 ... Fk to |s>; returns false when the result vanishes.
bool apply_term(const OpTerm& t, std::uint32_t& s, cplx& c) {
  for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it) {
    const std::uint32_t m = std::uint32_t{1} << (it->first - 1);
    const bool up = (s & m) != 0;
    switch (it->second) {
      case 'z':
        if (!up) c = -c;
        break;
      case 'n':
        if (!up) return false;
        break;
      case '+':
        if (up) return false;
        s |= m;
        break;
      case '-':
        if (!up) return false;
        s &= ~m;
        break;
      default:
        throw std::domain_error(std::string("unknown site factor '") + it->second + "'");
    }
  }
  return true;
}

void check_site(int j, int L) {
  if (j < 1 || j > L)
    throw std::domain_error("site " + std::to_string(j) + " outside chain of length " +
                            std::to_string(L));
}

int wrap(int j, int L) { return j > L ? j - L : j; }

// Bonds (i, i+1) for i = 1..L-1, plus (L, 1) when periodic.
std::vector<std::pair<int, int>> bonds(const ModelSpec& spec) {
  std::vector<std::pair<int, int>> out;
  for (int i = 1; i < spec.L; ++i) out.emplace_back(i, i + 1);
  if (spec.boundary == Boundary::periodic && spec.L > 2) out.emplace_back(spec.L, 1);
  return out;
}

void add_hop(std::vector<OpTerm>& t, double amp, int i, int k) {
  t.push_back({amp, {{i, '+'}, {k, '-'}}});
  t.push_back({amp, {{i, '-'}, {k, '+'}}});
}

void add_current(std::vector<OpTerm>& t, cplx amp, int i, int k) {
  t.push_back({amp, {{i, '+'}, {k, '-'}}});
  t.push_back({-amp, {{i, '-'}, {k, '+'}}});
}

void validate_spin(const ModelSpec& spec, const SectorBasis& basis) {
  if (spec.kind == ModelKind::fermion_chain)
    throw std::domain_error("fermion-chain spec has no spin Hamiltonian; use single_particle_matrix");
  if (!spec.eps.empty() || spec.U != 0.0)
    throw std::domain_error("spin model spec carries fermion-chain fields (eps/U)");
  if (spec.L != basis.L) throw std::domain_error("basis length does not match model length");
  if (spec.L < 2) throw std::domain_error("spin chain needs L >= 2");
  if ((spec.kind == ModelKind::single_impurity || spec.kind == ModelKind::staggered_field) &&
      spec.L % 2 != 0)
    throw std::domain_error("impurity and staggered models need even L");
}

}  // namespace

SparseOperator build_operator(const std::vector<OpTerm>& terms, const SectorBasis& basis,
                              bool hermitian) {
  for (const auto& t : terms)
    for (const auto& f : t.factors) check_site(f.first, basis.L);

  const auto dim = static_cast<Eigen::Index>(basis.dim());
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(basis.dim() * std::max<std::size_t>(terms.size() / 2, 1));
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (const auto& t : terms) {
      std::uint32_t s = basis.states[col];
      cplx c = t.coef;
      if (!apply_term(t, s, c)) continue;
      const auto row = basis.index(s);
      if (row < 0) throw std::domain_error("operator term leaves the sector");
      trip.emplace_back(row, col, c);
    }
  }
  SparseOperator op;
  op.mat.resize(dim, dim);
  op.mat.setFromTriplets(trip.begin(), trip.end());
  op.mat.prune(cplx{0.0, 0.0}, 1e-300);
  op.mat.makeCompressed();
  op.hermitian = hermitian;
  return op;
}

SparseOperator build_hamiltonian(const ModelSpec& spec, const SectorBasis& basis) {
  validate_spin(spec, basis);
  std::vector<OpTerm> t;
  for (auto [i, k] : bonds(spec)) {
    add_hop(t, 2.0 * spec.alpha, i, k);
    if (spec.Delta != 0.0) t.push_back({spec.Delta, {{i, 'z'}, {k, 'z'}}});
  }
  if (spec.kind == ModelKind::staggered_field && spec.b != 0.0)
    for (int j = 1; j <= spec.L; j += 2) t.push_back({spec.b, {{j, 'z'}}});
  if (spec.kind == ModelKind::single_impurity && spec.h != 0.0)
    t.push_back({spec.h, {{spec.impurity_site(), 'z'}}});
  if (spec.edge != 0.0) t.push_back({spec.edge, {{1, 'z'}}});
  return build_operator(t, basis, true);
}

SparseOperator build_observable(const ObservableSpec& o, const SectorBasis& basis) {
  const int L = basis.L;
  std::vector<OpTerm> t;
  switch (o.kind) {
    case ObservableKind::sz:
      check_site(o.site, L);
      t.push_back({1.0, {{o.site, 'z'}}});
      break;
    case ObservableKind::sz_pair:
      check_site(o.site + 1, L);
      t.push_back({1.0, {{o.site, 'z'}, {o.site + 1, 'z'}}});
      break;
    case ObservableKind::local_kinetic:
      check_site(o.site + 1, L);
      add_hop(t, 2.0, o.site, o.site + 1);
      break;
    case ObservableKind::kinetic_per_site:
      for (int i = 1; i < L; ++i) add_hop(t, 2.0 / L, i, i + 1);
      break;
    case ObservableKind::staggered_per_site:
    case ObservableKind::staggered_extensive: {
      const double w = o.kind == ObservableKind::staggered_per_site ? 1.0 / L : 1.0;
      for (int j = 1; j <= L; ++j) t.push_back({(j % 2 == 0 ? w : -w), {{j, 'z'}}});
      break;
    }
    case ObservableKind::gaussian_profile: {
      check_site(o.site, L);
      std::vector<double> u(L);
      double norm = 0.0;
      for (int j = 1; j <= L; ++j) {
        u[j - 1] = std::exp(-double(j - o.site) * double(j - o.site));
        norm += u[j - 1];
      }
      for (int j = 1; j <= L; ++j) t.push_back({u[j - 1] / norm, {{j, 'z'}}});
      break;
    }
    case ObservableKind::density:
      check_site(o.site, L);
      t.push_back({1.0, {{o.site, 'n'}}});
      break;
    default:
      throw std::domain_error("unknown observable kind");
  }
  return build_operator(t, basis, true);
}

SparseOperator kinetic_energy(const ModelSpec& spec, const SectorBasis& basis) {
  validate_spin(spec, basis);
  std::vector<OpTerm> t;
  for (auto [i, k] : bonds(spec)) add_hop(t, 2.0 * spec.alpha, i, k);
  return build_operator(t, basis, true);
}

SparseOperator bond_energy(const ModelSpec& spec, const SectorBasis& basis, int i) {
  validate_spin(spec, basis);
  const int nb = static_cast<int>(bonds(spec).size());
  if (i < 1 || i > nb) throw std::domain_error("bond index out of range");
  const int k = wrap(i + 1, spec.L);
  std::vector<OpTerm> t;
  add_hop(t, 2.0 * spec.alpha, i, k);
  if (spec.Delta != 0.0) t.push_back({spec.Delta, {{i, 'z'}, {k, 'z'}}});
  return build_operator(t, basis, true);
}

SparseOperator spin_current(const ModelSpec& spec, const SectorBasis& basis, int i) {
  validate_spin(spec, basis);
  const int nb = static_cast<int>(bonds(spec).size());
  if (i < 1 || i > nb) throw std::domain_error("bond index out of range");
  std::vector<OpTerm> t;
  add_current(t, 4.0 * spec.alpha * kI, i, wrap(i + 1, spec.L));
  return build_operator(t, basis, true);
}

SparseOperator energy_current(const ModelSpec& spec, const SectorBasis& basis, int i) {
  validate_spin(spec, basis);
  if (i < 2 || i > spec.L - 1)
    throw std::domain_error("energy current defined for bulk sites 2..L-1, got " +
                            std::to_string(i));
  const double a = spec.alpha;
  const int l = i - 1, r = i + 1;
  std::vector<OpTerm> t;
  // i [h_{i-1,i}, h_{i,i+1}] written out in ladder operators
  const cplx c1 = -4.0 * a * a * kI;
  t.push_back({c1, {{l, '+'}, {i, 'z'}, {r, '-'}}});
  t.push_back({-c1, {{l, '-'}, {i, 'z'}, {r, '+'}}});
  if (spec.Delta != 0.0) {
    const cplx c2 = 4.0 * a * spec.Delta * kI;
    t.push_back({c2, {{l, '+'}, {i, '-'}, {r, 'z'}}});
    t.push_back({-c2, {{l, '-'}, {i, '+'}, {r, 'z'}}});
    t.push_back({c2, {{l, 'z'}, {i, '+'}, {r, '-'}}});
    t.push_back({-c2, {{l, 'z'}, {i, '-'}, {r, '+'}}});
  }
  return build_operator(t, basis, true);
}

CurrentOperators build_current_operators(const ModelSpec& spec, const SectorBasis& basis) {
  validate_spin(spec, basis);
  CurrentOperators c;
  const int nb = static_cast<int>(bonds(spec).size());
  c.total.mat.resize(basis.dim(), basis.dim());
  for (int i = 1; i <= nb; ++i) {
    c.spin.push_back(spin_current(spec, basis, i));
    c.total.mat += c.spin.back().mat;
  }
  c.total.hermitian = true;
  c.per_site.mat = c.total.mat / double(spec.L);
  c.per_site.hermitian = true;
  for (int i = 2; i <= spec.L - 1; ++i) c.energy.push_back(energy_current(spec, basis, i));
  return c;
}

Mat single_particle_matrix(const ModelSpec& spec) {
  const auto D = static_cast<Eigen::Index>(spec.eps.size());
  if (D < 1) throw std::domain_error("fermion chain needs at least one on-site energy");
  Mat h = Mat::Zero(D, D);
  for (Eigen::Index j = 0; j < D; ++j) {
    h(j, j) = spec.eps[j];
    if (j + 1 < D) h(j, j + 1) = h(j + 1, j) = -spec.t_s;
  }
  return h;
}

SparseOperator fermion_annihilator(int L, int k) {
  check_site(k, L);
  OpTerm t{(k % 2 == 1) ? 1.0 : -1.0, {}};
  for (int j = 1; j < k; ++j) t.factors.emplace_back(j, 'z');
  t.factors.emplace_back(k, '-');
  return build_operator({t}, SectorBasis::full_space(L), false);
}

}  // namespace qtherm
