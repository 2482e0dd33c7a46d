#pragma once

#include <utility>
#include <vector>

#include "qtherm/spinops.hpp"
#include "qtherm/types.hpp"

namespace qtherm {

// boundary: sum 2 L rho L^+ - {L^+ L, rho};  standard: sum L rho L^+ - 1/2 {L^+ L, rho}
enum class DissipatorConvention { boundary, standard };

struct JumpTerm {
  SpMat op;
  double rate = 0.0;  // the jump operator is sqrt(rate) * op
};

struct LiouvillianModel {
  SpMat H;
  std::vector<JumpTerm> jumps;
  DissipatorConvention convention = DissipatorConvention::boundary;
  Eigen::Index dim() const { return H.rows(); }
};

struct NessSolution {
  Mat rho;
  double residual = 0.0;  // max |W vec(rho)|
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
};

struct NessProfile {
  std::vector<double> sz;        // sites 1..D
  std::vector<double> bond;      // bonds 1..D-1
  double j_left = 0.0;           // 4 gamma (mu - <sz_1>)
  double j_right = 0.0;          // 4 gamma (mu + <sz_D>)
  double j_left_direct = 0.0;    // Tr(sz_1 L_L{rho})
  double j_right_direct = 0.0;   // -Tr(sz_D L_R{rho}), outflow on the right
  double max_deviation = 0.0;    // max over bonds and boundaries of |j - j_1|
};

LiouvillianModel boundary_driving_model(const ModelSpec& spec, double gamma, double mu);

Mat build_liouvillian_matrix(const LiouvillianModel& model);
SpMat build_liouvillian_sparse(const LiouvillianModel& model);

// Applies the generator to rho without vectorization.
Mat apply_liouvillian(const LiouvillianModel& model, const Mat& rho);
Mat apply_dissipator(const LiouvillianModel& model, const Mat& rho, std::size_t first_jump,
                     std::size_t n_jumps);

// Dense path: trace row replaces the first row of W, LU with one refinement step.
NessSolution solve_ness(const Mat& W, Eigen::Index d);

// Sparse path; when H conserves the excitation number and every jump has a definite charge,
// the solve is restricted to the block where ket and bra carry equal charge.
NessSolution solve_ness(const LiouvillianModel& model);

NessProfile ness_observables(const NessSolution& sol, const ModelSpec& spec, double gamma,
                             double mu);

// rho(t) = exp(W t) rho0, dense.
Mat evolve_dense(const LiouvillianModel& model, const Mat& rho0, double t);

struct TransportFit {
  double nu = 0.0;
  double prefactor = 0.0;  // diffusion constant when gradients are supplied
};

// <j> = A / (D - 2 trim)^nu on log-log axes; with gradients, fit <j> / (2 grad) instead.
TransportFit transport_exponent_fit(const std::vector<std::pair<double, double>>& currents,
                                    int trim = 0, const std::vector<double>& gradients = {});

}  // namespace qtherm
