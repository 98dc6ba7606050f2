#pragma once

#include <Eigen/Dense>
#include <complex>

namespace scb {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
/// Accurate to about 1e-14 relative for well-scaled inputs.
CMat expm(const CMat& a);

/// exp(-i dt H) for Hermitian H through its eigendecomposition; the result is
/// unitary to machine precision regardless of dt.
CMat unitary_step(const CMat& hermitian, double dt);

/// a^n by repeated squaring, n >= 0.
CMat matrix_power(const CMat& a, long n);

/// Frobenius norm of U^dagger U - I.
double unitarity_defect(const CMat& u);

double hermiticity_defect(const CMat& m);

}  // namespace scb
