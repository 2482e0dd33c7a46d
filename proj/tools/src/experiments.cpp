#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "qtherm/dynamics.hpp"
#include "qtherm/ethstats.hpp"
#include "qtherm/kubo.hpp"
#include "qtherm/landauer.hpp"
#include "qtherm/lindblad.hpp"
#include "qtherm/mesoleads.hpp"
#include "qtherm/spectra.hpp"
#include "qtherm/spinops.hpp"
#include "qtherm_cli/runner.hpp"

namespace qtherm::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sweep points land in fixed slots, so the output order never depends on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < std::min<std::size_t>(threads, n); ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < n;) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(m);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

ModelKind parse_kind(const std::string& key, const std::string& s) {
  if (s == "xxz") return ModelKind::xxz;
  if (s == "single-impurity") return ModelKind::single_impurity;
  if (s == "staggered-field") return ModelKind::staggered_field;
  if (s == "fermion-chain") return ModelKind::fermion_chain;
  throw ConfigError(key, "unknown model '" + s +
                             "' (xxz, single-impurity, staggered-field, fermion-chain)");
}

// scalar_h = false leaves model.h to the caller, which may read it as a sweep list.
ModelSpec spin_model(const Config& c, int L, bool scalar_h = true) {
  ModelSpec s;
  s.kind = parse_kind("model.kind", c.str("model.kind"));
  if (s.kind == ModelKind::fermion_chain)
    throw ConfigError("model.kind", "this experiment needs a spin model");
  s.L = L;
  s.alpha = c.num("model.alpha", 1.0);
  s.Delta = c.num("model.Delta", 0.0);
  if (scalar_h) s.h = c.num("model.h", 0.0);
  s.b = c.num("model.b", 0.0);
  s.edge = c.num("model.edge", 0.1 * s.alpha);
  const std::string bc = c.str("model.boundary", "open");
  if (bc == "open")
    s.boundary = Boundary::open;
  else if (bc == "periodic")
    s.boundary = Boundary::periodic;
  else
    throw ConfigError("model.boundary", "expected open or periodic, got '" + bc + "'");
  return s;
}

struct SpinSetup {
  ModelSpec spec;
  SectorBasis basis;
};

SpinSetup spin_setup(const Config& c) {
  const long L = c.integer("model.L");
  if (L < 2 || L > 24) throw ConfigError("model.L", "expected 2 <= L <= 24");
  SpinSetup s{spin_model(c, static_cast<int>(L)), {}};
  const std::string sector = c.str("model.sector", std::to_string(L / 2));
  if (sector == "full") {
    s.basis = SectorBasis::full_space(s.spec.L);
  } else {
    const double n = parse_double("model.sector", sector);
    if (n != std::floor(n) || n < 0 || n > L)
      throw ConfigError("model.sector", "expected an up-spin count in [0, L] or 'full'");
    s.basis = build_sector_basis(s.spec.L, static_cast<int>(n));
  }
  return s;
}

ObservableSpec observable_spec(const Config& c, int L, bool* extensive = nullptr) {
  static const std::map<std::string, ObservableKind> kinds{
      {"sz", ObservableKind::sz},
      {"sz-pair", ObservableKind::sz_pair},
      {"local-kinetic", ObservableKind::local_kinetic},
      {"kinetic-per-site", ObservableKind::kinetic_per_site},
      {"staggered-per-site", ObservableKind::staggered_per_site},
      {"staggered-extensive", ObservableKind::staggered_extensive},
      {"gaussian-profile", ObservableKind::gaussian_profile},
      {"density", ObservableKind::density}};
  const std::string k = c.str("observable.kind");
  const auto it = kinds.find(k);
  if (it == kinds.end()) throw ConfigError("observable.kind", "unknown observable '" + k + "'");
  const long site = c.integer("observable.site", L / 2);
  if (site < 1 || site > L) throw ConfigError("observable.site", "outside the chain");
  if (extensive) *extensive = it->second == ObservableKind::staggered_extensive;
  return {it->second, static_cast<int>(site)};
}

std::vector<double> time_grid(const Config& c) {
  if (c.has("numerics.times")) return c.list("numerics.times");
  const double t_max = c.num("numerics.t_max", 10.0), dt = c.num("numerics.dt", 0.1);
  if (!(dt > 0.0) || t_max < 0.0) throw ConfigError("numerics.dt", "need dt > 0 and t_max >= 0");
  std::vector<double> t;
  const long n = std::lround(t_max / dt);
  for (long k = 0; k <= n; ++k) t.push_back(k * dt);
  return t;
}

// Target energy: ensemble.energy when given, else the canonical energy at ensemble.beta.
double target_energy(const Config& c, const EnergyEigensystem& eig) {
  if (c.has("ensemble.energy")) return c.num("ensemble.energy");
  return thermal_energy(eig.E, c.num("ensemble.beta"));
}

struct EigenSetup {
  SpinSetup s;
  EnergyEigensystem eig;
  ObservableMatrix Om;
};

EigenSetup eigen_setup(const Config& c) {
  EigenSetup e{spin_setup(c), {}, {}};
  e.eig = diagonalize(build_hamiltonian(e.s.spec, e.s.basis));
  bool ext = false;
  const auto o = observable_spec(c, e.s.spec.L, &ext);
  e.Om = to_eigenbasis(build_observable(o, e.s.basis), e.eig, ext);
  return e;
}

Mat system_matrix(const Config& c) {
  ModelSpec m;
  m.kind = ModelKind::fermion_chain;
  m.eps = c.list("system.eps", {0.0});
  m.t_s = c.num("system.t_s", 1.0);
  m.L = static_cast<int>(m.eps.size());
  return single_particle_matrix(m);
}

struct LeadParams {
  double W, W_star, log_fraction, Gamma;
};

LeadParams lead_params(const Config& c) {
  LeadParams p;
  p.W = c.num("leads.W", 8.0);
  p.W_star = c.num("leads.W_star", p.W / 2.0);
  p.log_fraction = c.num("leads.log_fraction", 0.2);
  p.Gamma = c.num("leads.Gamma", 1.0);
  return p;
}

Table profile_table(const std::string& name, const std::vector<std::string>& cols,
                    const FrequencyProfile& p) {
  Table t{name, cols, {}};
  for (std::size_t k = 0; k < p.omega.size(); ++k)
    t.add({p.omega[k], p.value[k], static_cast<double>(p.count[k])});
  return t;
}

// ---------------------------------------------------------------------------------------------

ExperimentOutput level_stats(const Config& c, const Context&) {
  const auto s = spin_setup(c);
  const RVec E = eigenvalues(build_hamiltonian(s.spec, s.basis));
  const auto g = gap_ratio_stats(E, c.num("numerics.keep_fraction", 0.8),
                                 static_cast<int>(c.integer("numerics.unfold_window", 20)));
  ExperimentOutput out;
  Table h{"", {"s", "P"}, {}};
  for (const auto& [x, p] : g.histogram) h.add({x, p});
  out.tables.push_back(std::move(h));
  if (c.has("numerics.sff_times")) {
    const auto t = c.list("numerics.sff_times");
    const auto K = spectral_form_factor(E, t);
    Table f{"sff", {"t", "K"}, {}};
    for (std::size_t k = 0; k < t.size(); ++k) f.add({t[k], K[k]});
    out.tables.push_back(std::move(f));
  }
  out.results = {{"r_mean", g.r_mean}, {"dim", E.size()}, {"fraction_used", g.fraction_used},
                 {"dropped", g.dropped}};
  return out;
}

ExperimentOutput kubo(const Config& c, const Context&) {
  const double domega = c.num("numerics.domega", 0.05);
  const std::string path = c.str("numerics.path", "exact");
  ConductivityProfile p;
  if (path == "free-fermion") {
    const long L = c.integer("model.L");
    if (L < 2) throw ConfigError("model.L", "expected L >= 2");
    const auto spec = spin_model(c, static_cast<int>(L));
    p = free_fermion_conductivity(spec, domega);
  } else if (path == "exact") {
    const auto s = spin_setup(c);
    const auto eig = diagonalize(build_hamiltonian(s.spec, s.basis));
    const auto J = to_eigenbasis(kubo_current(s.spec, s.basis), eig);
    const auto T = to_eigenbasis(kinetic_energy(s.spec, s.basis), eig);
    p = conductivity_profile(eig, J, T, s.spec.L, c.num("ensemble.beta", 0.001), domega,
                             c.flag("numerics.normalize", true));
  } else {
    throw ConfigError("numerics.path", "expected exact or free-fermion, got '" + path + "'");
  }
  const auto cum = cumulative_weight(p);
  ExperimentOutput out;
  Table t{"", {"omega", "sigma", "cumulative"}, {}};
  for (std::size_t k = 0; k < p.omega.size(); ++k) t.add({p.omega[k], p.sigma[k], cum[k]});
  out.tables.push_back(std::move(t));
  out.results = {{"D_L", p.D_L},       {"D_bar", p.D_bar},
                 {"minus_T", p.minus_T}, {"finite_weight", p.finite_weight},
                 {"sum_rule", p.sum_rule}, {"normalized", p.normalized}};
  if (c.has("numerics.xi_hi"))
    out.results["Xi"] = peak_weight_xi(p, c.num("numerics.xi_lo", 0.0), c.num("numerics.xi_hi"),
                                       c.num("numerics.xi_baseline", 0.0));
  return out;
}

ExperimentOutput eth_diagonal(const Config& c, const Context&) {
  const auto e = eigen_setup(c);
  const auto d = diagonal_profile(e.Om, c.num("numerics.central_fraction", 0.2),
                                  c.num("numerics.coarse_width", 0.02));
  ExperimentOutput out;
  Table t{"", {"eps", "O_nn"}, {}};
  for (std::size_t k = 0; k < d.eps.size(); ++k) t.add({d.eps[k], d.O_nn[k]});
  Table coarse{"coarse", {"eps", "mean"}, {}};
  for (const auto& [x, v] : d.coarse) coarse.add({x, v});
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(coarse));
  out.results = {{"ete", d.ete}, {"dim", e.eig.dim()}, {"bandwidth", e.eig.bandwidth}};
  return out;
}

ExperimentOutput eth_offdiag(const Config& c, const Context&) {
  const auto e = eigen_setup(c);
  const double E_star = target_energy(c, e.eig), window = c.num("numerics.window", 0.05);
  const auto p = offdiag_f2_profile(e.Om, E_star, window, c.num("numerics.domega", 0.05));
  ExperimentOutput out;
  out.tables.push_back(profile_table("", {"omega", "f2", "count"}, p));
  out.results = {{"E_star", E_star},
                 {"eigenstate_variance", eigenstate_variance(e.Om, E_star, window)}};
  return out;
}

ExperimentOutput gamma_ratio(const Config& c, const Context&) {
  const auto e = eigen_setup(c);
  const double E_star = target_energy(c, e.eig);
  const auto p = gamma_ratio_profile(e.Om, E_star, c.num("numerics.window", 0.05),
                                     c.num("numerics.domega", 0.05),
                                     static_cast<std::size_t>(c.integer("numerics.min_count", 10)));
  const double lo = c.num("numerics.omega_lo", 0.5), hi = c.num("numerics.omega_hi", 1.5);
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < p.omega.size(); ++k)
    if (p.omega[k] >= lo && p.omega[k] <= hi) sum += p.value[k], ++n;
  ExperimentOutput out;
  out.tables.push_back(profile_table("", {"omega", "gamma", "count"}, p));
  out.results = {{"E_star", E_star},
                 {"gamma_mean", n ? sum / n : kNaN},
                 {"bins_averaged", n},
                 {"gaussian_value", std::numbers::pi / 2.0}};
  return out;
}

ExperimentOutput banded_goe(const Config& c, const Context& ctx) {
  const auto e = eigen_setup(c);
  const double E_star = target_energy(c, e.eig), window = c.num("numerics.window", 0.05);
  const double omega_c = c.num("numerics.omega_c", 2.0 * e.eig.bandwidth);
  const auto test = banded_goe_test(e.Om, E_star, window, omega_c, ctx.seed);
  const Mat sub = banded_submatrix(e.Om, E_star, window, omega_c);
  const long n_null = c.integer("numerics.null_seeds", 20);
  if (n_null < 2) throw ConfigError("numerics.null_seeds", "need at least 2");
  std::vector<double> null(n_null);
  for (long k = 0; k < n_null; ++k)
    null[k] = fourth_moment_ratio(diagonalize(randomize_signs(sub, ctx.seed + 1 + k)).E);
  double mu = 0.0, var = 0.0;
  for (double v : null) mu += v;
  mu /= n_null;
  for (double v : null) var += (v - mu) * (v - mu);
  const double sd = std::sqrt(var / (n_null - 1));
  const double k_obs = fourth_moment_ratio(test.spectrum);

  ExperimentOutput out;
  Table t{"", {"index", "eigenvalue", "randomized"}, {}};
  for (Eigen::Index k = 0; k < test.spectrum.size(); ++k)
    t.add({static_cast<double>(k), test.spectrum(k), test.randomized_spectrum(k)});
  out.tables.push_back(std::move(t));
  out.results = {{"dim", test.dim},
                 {"E_star", E_star},
                 {"omega_c", omega_c},
                 {"r_mean", test.r_mean},
                 {"r_mean_randomized", test.r_mean_randomized},
                 {"below_floor", test.below_floor},
                 {"fourth_moment_ratio", k_obs},
                 {"null_mean", mu},
                 {"null_sd", sd},
                 {"deviation_sigmas", sd > 0 ? std::abs(k_obs - 2.0) / sd : kNaN}};
  return out;
}

ExperimentOutput f2(const Config& c, const Context&) {
  const auto e = eigen_setup(c);
  const double beta = c.num("ensemble.beta");
  // default shell: the canonical energy spread, so both sides average the same states
  const double window = c.str("numerics.window", "thermal") == "thermal"
                            ? 2.0 * thermal_energy_spread(e.eig.E, beta) / e.eig.bandwidth
                            : c.num("numerics.window");
  const double E_star = thermal_energy(e.eig.E, beta);
  const auto times = time_grid(c);
  const auto can = f2_canonical(e.eig, e.Om, beta, times);
  const auto prof = offdiag_f2_profile(e.Om, E_star, window, c.num("numerics.domega", 0.05));
  const auto eth = eth_reconstruct(prof, beta, eigenstate_variance(e.Om, E_star, window), times);
  double offset = 0.0, dev = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) offset += can.value[k].real() - eth.value[k].real();
  offset /= times.size();
  for (std::size_t k = 0; k < times.size(); ++k)
    dev = std::max(dev, std::abs(can.value[k].real() - offset - eth.value[k].real()));
  ExperimentOutput out;
  Table t{"", {"t", "exact_re", "exact_im", "eth_re", "eth_im"}, {}};
  for (std::size_t k = 0; k < times.size(); ++k)
    t.add({times[k], can.value[k].real(), can.value[k].imag(), eth.value[k].real(),
           eth.value[k].imag()});
  out.tables.push_back(std::move(t));
  out.results = {{"E_star", E_star},
                 {"window", window},
                 {"offset", offset},
                 {"max_deviation", dev},
                 {"F2_0", can.value.front().real()}};
  return out;
}

ExperimentOutput fdt(const Config& c, const Context&) {
  const auto e = eigen_setup(c);
  const double beta = c.num("ensemble.beta");
  const double omega_max = c.num("numerics.omega_max", 4.0);
  const auto [sp, sm] = spectral_functions(e.Om, boltzmann_weights(e.eig.E, beta),
                                           c.num("numerics.domega", 0.05), omega_max);
  const double fit = fdt_beta_fit(sp, sm, c.num("numerics.omega_max_fit", omega_max));
  ExperimentOutput out;
  Table t{"", {"omega", "S_plus", "S_minus"}, {}};
  for (std::size_t k = 0; k < sp.omega.size(); ++k) t.add({sp.omega[k], sp.value[k], sm.value[k]});
  out.tables.push_back(std::move(t));
  out.results = {{"beta", beta}, {"beta_fit", fit}};
  return out;
}

ExperimentOutput qfi_run(const Config& c, const Context&) {
  const auto e = eigen_setup(c);
  std::vector<double> betas;
  if (c.has("ensemble.betas")) {
    betas = c.list("ensemble.betas");
  } else {
    const double lo = c.num("ensemble.beta_min", 0.0), hi = c.num("ensemble.beta_max", 50.0);
    const long n = c.integer("ensemble.beta_count", 20);
    if (n < 2) throw ConfigError("ensemble.beta_count", "need at least 2 points");
    for (long k = 0; k < n; ++k) betas.push_back(lo + (hi - lo) * k / (n - 1));
  }
  const auto q = qfi(e.eig, e.Om, betas, e.s.spec.L, c.num("numerics.window", 0.0));
  ExperimentOutput out;
  Table t{"", {"beta", "F_gibbs", "F_eth", "f_gibbs", "f_eth"}, {}};
  bool bound = true;
  for (std::size_t k = 0; k < q.beta.size(); ++k) {
    t.add({q.beta[k], q.F_gibbs[k], q.F_eth[k], q.f_gibbs[k], q.f_eth[k]});
    bound = bound && q.F_eth[k] >= q.F_gibbs[k] * (1.0 - 1e-8);
  }
  out.tables.push_back(std::move(t));
  out.results = {{"bound_holds", bound}};
  return out;
}

ExperimentOutput otoc(const Config& c, const Context&) {
  const auto e = eigen_setup(c);
  const double beta = c.num("ensemble.beta", 0.0);
  const auto times = time_grid(c);
  const auto exact = otoc_exact(e.eig, e.Om, beta, times);
  const std::string src = c.str("numerics.f2_source", "canonical");
  CorrelationSeries F2;
  if (src == "canonical") {
    F2 = f2_canonical(e.eig, e.Om, beta, times);
  } else if (src == "eth") {
    const double E_star = thermal_energy(e.eig.E, beta), window = c.num("numerics.window", 0.05);
    const auto prof = offdiag_f2_profile(e.Om, E_star, window, c.num("numerics.domega", 0.05));
    F2 = eth_reconstruct(prof, beta, eigenstate_variance(e.Om, E_star, window), times);
  } else {
    throw ConfigError("numerics.f2_source", "expected canonical or eth, got '" + src + "'");
  }
  const auto eth = otoc_eth_uncorrelated(F2);
  ExperimentOutput out;
  Table t{"", {"t", "exact", "eth_uncorrelated"}, {}};
  for (std::size_t k = 0; k < times.size(); ++k) t.add({times[k], exact[k], eth[k]});
  out.tables.push_back(std::move(t));
  if (times.size() > 1)
    out.results = {{"saturation_time_exact", saturation_time(times, exact)},
                   {"saturation_time_eth", saturation_time(times, eth)}};
  return out;
}

ExperimentOutput typicality(const Config& c, const Context& ctx) {
  const auto s = spin_setup(c);
  const auto H = build_hamiltonian(s.spec, s.basis);
  const auto O = build_observable(observable_spec(c, s.spec.L), s.basis);
  const auto times = time_grid(c);
  const long n = c.integer("numerics.samples", 200);
  if (n < 2) throw ConfigError("numerics.samples", "need at least 2 samples");
  const auto r = otoc_typicality(H, O, times, static_cast<int>(n), ctx.seed,
                                 static_cast<int>(c.integer("numerics.krylov_m", 30)),
                                 c.num("numerics.rel_stderr_stop", 0.01));
  const bool compare = c.flag("numerics.compare_exact", false);
  std::vector<double> exact;
  if (compare) {
    const auto eig = diagonalize(H);
    exact = otoc_exact(eig, to_eigenbasis(O, eig), 0.0, times);
  }
  ExperimentOutput out;
  Table t{"", {"t", "mean", "stderr"}, {}};
  if (compare) t.columns.push_back("exact");
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    t.add({r.t[k], r.mean[k], r.stderr_[k]});
    if (compare) t.rows.back().push_back(exact[k]);
  }
  out.tables.push_back(std::move(t));
  out.results = {{"samples", r.samples}, {"dim", s.basis.dim()}};
  return out;
}

ExperimentOutput driven(const Config& c, const Context&) {
  const auto s = spin_setup(c);
  const auto H = build_hamiltonian(s.spec, s.basis);
  const auto eig = diagonalize(H);
  const long j0 = c.integer("drive.site", s.spec.L / 2);
  if (j0 < 1 || j0 > s.spec.L) throw ConfigError("drive.site", "outside the chain");
  const int j = static_cast<int>(j0);
  const auto V = build_observable({ObservableKind::gaussian_profile, j}, s.basis);
  const auto Oz = build_observable({ObservableKind::sz, j}, s.basis);
  const auto K = build_observable({ObservableKind::kinetic_per_site, 1}, s.basis);
  const double t_relax = c.num("drive.t_relax", 40.0);
  const Vec psi0 = eig.U.col(0);
  const auto run = driven_relaxation(H, V, psi0, c.num("drive.a", 2.0), c.num("drive.omega0", 2.0),
                                     c.num("drive.t_prep", 20.0), t_relax, {Oz, V, K},
                                     c.num("drive.dt", 0.01), c.num("drive.record_every", 0.1));
  const double from = c.num("numerics.average_from", 0.5 * t_relax);
  std::vector<double> avg(3, 0.0);
  int n = 0;
  for (std::size_t k = 0; k < run.times.size(); ++k)
    if (run.times[k] >= from) {
      for (int o = 0; o < 3; ++o) avg[o] += run.series[o][k];
      ++n;
    }
  if (n == 0) throw ConfigError("numerics.average_from", "no samples after this time");
  for (double& a : avg) a /= n;
  const double window = c.num("numerics.window", 0.05);
  const auto Oe = to_eigenbasis(Oz, eig);
  const auto Ke = to_eigenbasis(K, eig);
  ExperimentOutput out;
  Table t{"", {"t", "sz", "profile", "kinetic_per_site"}, {}};
  for (std::size_t k = 0; k < run.times.size(); ++k)
    t.add({run.times[k], run.series[0][k], run.series[1][k], run.series[2][k]});
  out.tables.push_back(std::move(t));
  out.results = {
      {"E_prep", run.E_prep},
      {"energy_variance", run.dE2},
      {"dt", run.dt},
      {"norm_drift", run.norm_drift},
      {"relaxed_sz", avg[0]},
      {"relaxed_kinetic_per_site", avg[2]},
      {"micro_sz", microcanonical_average(Oe.O.diagonal().real(), eig.E, run.E_prep, window)},
      {"micro_kinetic_per_site",
       microcanonical_average(Ke.O.diagonal().real(), eig.E, run.E_prep, window)}};
  return out;
}

ExperimentOutput bd_ness(const Config& c, const Context& ctx) {
  const auto Ls = c.list("model.L");
  const auto hs = c.list("model.h", {0.0});
  const auto mus = c.list("drive.mu");
  const double gamma = c.num("drive.gamma", 1.0);
  if (!(gamma > 0.0)) throw ConfigError("drive.gamma", "must be positive");
  std::vector<ModelSpec> specs;
  for (double L : Ls) {
    if (L != std::floor(L) || L < 2 || L > 10)
      throw ConfigError("model.L", "expected integers in [2, 10]");
    for (double h : hs) {
      auto s = spin_model(c, static_cast<int>(L), false);
      s.h = h;
      if (s.boundary != Boundary::open) throw ConfigError("model.boundary", "driving needs open");
      specs.push_back(s);
    }
  }

  struct Point {
    NessSolution sol;
    NessProfile prof;
  };
  std::vector<Point> pts(specs.size() * mus.size());
  parallel_for(pts.size(), ctx.threads, [&](std::size_t i) {
    const auto& s = specs[i / mus.size()];
    const double mu = mus[i % mus.size()];
    pts[i].sol = solve_ness(boundary_driving_model(s, gamma, mu));
    pts[i].prof = ness_observables(pts[i].sol, s, gamma, mu);
    pts[i].sol.rho.resize(0, 0);
  });

  ExperimentOutput out;
  Table t{"",
          {"L", "h", "mu", "current", "j_left", "j_right", "max_deviation", "residual",
           "trace_error", "min_eigenvalue"},
          {}};
  Table prof{"profile", {"L", "h", "mu", "site", "sz"}, {}};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& s = specs[i / mus.size()];
    const double mu = mus[i % mus.size()];
    const auto& p = pts[i];
    const double j = p.prof.bond.empty() ? p.prof.j_left : p.prof.bond.front();
    t.add({double(s.L), s.h, mu, j, p.prof.j_left, p.prof.j_right, p.prof.max_deviation,
           p.sol.residual, p.sol.trace_error, p.sol.min_eigenvalue});
    for (std::size_t k = 0; k < p.prof.sz.size(); ++k)
      prof.add({double(s.L), s.h, mu, double(k + 1), p.prof.sz[k]});
  }
  // size scaling of the current at each bias, when several lengths share one field
  if (Ls.size() >= 2 && hs.size() == 1) {
    nlohmann::json fits = nlohmann::json::array();
    for (std::size_t m = 0; m < mus.size(); ++m) {
      if (mus[m] == 0.0) continue;
      std::vector<std::pair<double, double>> js;
      for (std::size_t l = 0; l < Ls.size(); ++l) js.emplace_back(Ls[l], t.rows[l * mus.size() + m][3]);
      const auto f = transport_exponent_fit(js);
      fits.push_back({{"mu", mus[m]}, {"nu", f.nu}, {"prefactor", f.prefactor}});
    }
    out.results["transport_fits"] = fits;
  }
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(prof));
  out.results["points"] = pts.size();
  return out;
}

ExperimentOutput meso_engine(const Config& c, const Context& ctx) {
  const Mat h = system_matrix(c);
  const auto lp = lead_params(c);
  const double T_L = c.num("engine.T_L"), T_R = c.num("engine.T_R");
  if (!(T_L > 0.0 && T_R > 0.0)) throw ConfigError("engine.T_L", "temperatures must be positive");
  const long L = c.integer("leads.L", 50);
  if (L < 1) throw ConfigError("leads.L", "need at least one mode per lead");
  const auto mus = c.list("sweep.mu"), Vs = c.list("sweep.V");
  struct Point {
    MesoResult r;
    EngineMetrics m;
  };
  std::vector<Point> pts(mus.size() * Vs.size());
  parallel_for(pts.size(), ctx.threads, [&](std::size_t i) {
    const double mu = mus[i / Vs.size()], V = Vs[i % Vs.size()];
    const double mu_L = mu - V / 2, mu_R = mu + V / 2;
    pts[i].r = solve_meso(
        h, discretize_lead(lp.W, lp.W_star, int(L), lp.log_fraction, 1.0 / T_L, mu_L, lp.Gamma),
        discretize_lead(lp.W, lp.W_star, int(L), lp.log_fraction, 1.0 / T_R, mu_R, lp.Gamma));
    pts[i].m = engine_metrics(pts[i].r.left.JP, pts[i].r.left.JE, T_L, T_R, mu_L, mu_R);
  });
  ExperimentOutput out;
  Table t{"",
          {"mu", "V", "JP", "JE", "JP_right", "JE_right", "P", "QL", "QR", "eta", "eta_carnot"},
          {}};
  double first = 0.0, best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  int engines = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& [r, m] = pts[i];
    t.add({mus[i / Vs.size()], Vs[i % Vs.size()], r.left.JP, r.left.JE, r.right.JP, r.right.JE,
           m.P, m.QL, m.QR, m.eta, m.eta_carnot});
    first = std::max(first, std::abs(m.P - (m.QL - m.QR)));
    if (m.engine) {
      ++engines;
      if (m.P > best) best = m.P, best_i = i;
    }
  }
  out.tables.push_back(std::move(t));
  out.results = {{"points", pts.size()}, {"engines", engines}, {"first_law_max", first}};
  if (engines)
    out.results["max_power"] = {{"mu", mus[best_i / Vs.size()]},
                                {"V", Vs[best_i % Vs.size()]},
                                {"P", best},
                                {"eta", pts[best_i].m.eta}};
  return out;
}

ExperimentOutput lb_benchmark(const Config& c, const Context& ctx) {
  const Mat h = system_matrix(c);
  const auto lp = lead_params(c);
  const double T_L = c.num("bias.T_L"), T_R = c.num("bias.T_R");
  const double mu_L = c.num("bias.mu_L"), mu_R = c.num("bias.mu_R");
  if (!(T_L > 0.0 && T_R > 0.0)) throw ConfigError("bias.T_L", "temperatures must be positive");
  const TransmissionModel tm{h, lp.Gamma, lp.W};
  const auto lb = lb_currents(tm, T_L, T_R, mu_L, mu_R, c.num("numerics.tol", 1e-10));
  std::vector<double> sizes = c.list("leads.sizes", {25, 50, 100});
  std::vector<MesoResult> res(sizes.size());
  for (double L : sizes)
    if (L != std::floor(L) || L < 1) throw ConfigError("leads.sizes", "expected positive integers");
  parallel_for(sizes.size(), ctx.threads, [&](std::size_t i) {
    const int L = static_cast<int>(sizes[i]);
    res[i] = solve_meso(h, discretize_lead(lp.W, lp.W_star, L, lp.log_fraction, 1.0 / T_L, mu_L, lp.Gamma),
                        discretize_lead(lp.W, lp.W_star, L, lp.log_fraction, 1.0 / T_R, mu_R, lp.Gamma));
  });
  auto rel = [](double a, double b) { return b != 0.0 ? std::abs(a - b) / std::abs(b) : kNaN; };
  ExperimentOutput out;
  Table t{"", {"L", "JP_meso", "JE_meso", "JP_lb", "JE_lb", "JP_rel_err", "JE_rel_err"}, {}};
  for (std::size_t i = 0; i < sizes.size(); ++i)
    t.add({sizes[i], res[i].left.JP, res[i].left.JE, lb.JP, lb.JE, rel(res[i].left.JP, lb.JP),
           rel(res[i].left.JE, lb.JE)});
  out.tables.push_back(std::move(t));
  const long n = c.integer("numerics.omega_points", 401);
  if (n < 2) throw ConfigError("numerics.omega_points", "need at least 2 points");
  Table tau{"transmission", {"omega", "tau"}, {}};
  for (long k = 0; k < n; ++k) {
    const double w = -lp.W + 2.0 * lp.W * k / (n - 1);
    tau.add({w, transmission(tm, w)});
  }
  out.tables.push_back(std::move(tau));
  out.results = {{"JP_lb", lb.JP}, {"JE_lb", lb.JE}};
  return out;
}

using Runner = ExperimentOutput (*)(const Config&, const Context&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"level-stats", level_stats}, {"kubo", kubo},
      {"eth-diagonal", eth_diagonal}, {"eth-offdiag", eth_offdiag},
      {"gamma-ratio", gamma_ratio},   {"banded-goe", banded_goe},
      {"f2", f2},                     {"fdt", fdt},
      {"qfi", qfi_run},               {"otoc", otoc},
      {"typicality", typicality},     {"driven", driven},
      {"bd-ness", bd_ness},           {"meso-engine", meso_engine},
      {"lb-benchmark", lb_benchmark}};
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, f] : registry()) n.push_back(k);
    return n;
  }();
  return names;
}

ExperimentOutput compute_experiment(const std::string& name, const Config& cfg, const Context& ctx) {
  for (const auto& [k, f] : registry())
    if (k == name) return f(cfg, ctx);
  throw std::out_of_range("unknown experiment '" + name + "'");
}

}  // namespace qtherm::cli
