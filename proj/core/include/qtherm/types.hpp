#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qtherm {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<cplx>;

inline constexpr cplx kI{0.0, 1.0};

}  // namespace qtherm
