#pragma once

#include <vector>

#include "qtherm/mesoleads.hpp"
#include "qtherm/types.hpp"

namespace qtherm {

// Flat band of half-width W and strength Gamma on both ends of the system.
struct TransmissionModel {
  Mat H;  // D x D single-particle matrix
  double Gamma = 1.0;
  double W = 8.0;
};

// Retarded flat-band self-energy, (Gamma / 2 pi) ln|(W + w) / (W - w)| - i Gamma / 2 inside the band.
// The real part carries the sign of sum_k |kappa_k|^2 / (w - eps_k), which the damped-mode leads
// converge to; the opposite sign drifts away from them as the leads grow.
cplx flat_band_self_energy(double Gamma, double W, double omega);

double transmission(const TransmissionModel& m, double omega);

struct LbCurrents {
  double JP = 0.0;
  double JE = 0.0;
};

// Adaptive Gauss-Kronrod over [-W, W] to an absolute tolerance; `initial` sets the first split.
LbCurrents lb_currents(const TransmissionModel& m, double T_L, double T_R, double mu_L,
                       double mu_R, double tol = 1e-10, int initial = 16);

struct EnginePoint {
  double mu = 0.0;  // (mu_L + mu_R) / 2
  double V = 0.0;   // mu_R - mu_L
  double T_L = 0.0;
  double T_R = 0.0;
  double JP = 0.0;
  double JE = 0.0;
  EngineMetrics metrics;
};

std::vector<EnginePoint> lb_engine_sweep(const TransmissionModel& m, const std::vector<double>& mus,
                                         const std::vector<double>& Vs, double T_L, double T_R);

}  // namespace qtherm
