#include "scb/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace scb {

CMat expm(const CMat& a) {
  const Eigen::Index n = a.rows();
  // One-norm drives the scaling; keep the scaled norm below 1/2 so that an
  // 18-term Taylor tail is far below double precision.
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  }
  const CMat scaled = a / std::ldexp(1.0, squarings);

  CMat result = CMat::Identity(n, n);
  CMat term = CMat::Identity(n, n);
  for (int k = 1; k <= 18; ++k) {
    term = term * scaled / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-18 * result.norm()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

CMat unitary_step(const CMat& hermitian, double dt) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(hermitian);
  const RVec& lambda = eig.eigenvalues();
  const CMat& v = eig.eigenvectors();
  CVec phases(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    phases(k) = std::exp(cplx(0.0, -dt * lambda(k)));
  }
  return v * phases.asDiagonal() * v.adjoint();
}

CMat matrix_power(const CMat& a, long n) {
  CMat result = CMat::Identity(a.rows(), a.cols());
  CMat base = a;
  while (n > 0) {
    if (n & 1) result = base * result;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

double unitarity_defect(const CMat& u) {
  return (u.adjoint() * u - CMat::Identity(u.cols(), u.cols())).norm();
}

double hermiticity_defect(const CMat& m) { return (m - m.adjoint()).norm(); }

}  // namespace scb
