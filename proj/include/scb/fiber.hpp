#pragma once

#include <vector>

#include "scb/linalg.hpp"

namespace scb {

/// Shape of a fiber: Hermite functions of `n` variables with total degree
/// below `ncut`.
struct FiberDims {
  int n = 1;
  int ncut = 16;

  int size() const;
  bool operator==(const FiberDims&) const = default;
};

/// Multi-indices of the truncated basis in graded order; index i of a
/// coefficient vector refers to basis_indices(d)[i].
const std::vector<std::vector<int>>& basis_indices(const FiberDims& dims);

/// Position of a multi-index in the basis, or -1 when it is truncated away.
int basis_position(const FiberDims& dims, const std::vector<int>& multi_index);

/// Quantum fluctuation state f(xi) in Hermite coordinates.
struct FiberVector {
  CVec coeffs;
  FiberDims dims;

  static FiberVector zero(const FiberDims& dims);
  /// Normalized basis state e_k.
  static FiberVector basis(const FiberDims& dims, int k);

  double norm() const { return coeffs.norm(); }
  FiberVector operator+(const FiberVector& o) const;
  FiberVector operator-(const FiberVector& o) const;
  FiberVector operator*(cplx s) const;
};

struct FiberOperator {
  CMat matrix;
  bool hermitian = false;
  bool unitary = false;

  static FiberOperator identity(const FiberDims& dims);
  FiberVector apply(const FiberVector& v) const;
  FiberOperator operator*(const FiberOperator& o) const;
};

/// (phi, psi), conjugate-linear in phi. Throws InputError on shape mismatch.
cplx inner(const FiberVector& phi, const FiberVector& psi);

/// ||U^dagger U - I||_F.
double unitarity_residual(const FiberOperator& u);

/// Hermitian matrix of
///   1/2 [xi.hqq.xi + xi.hqp.p + p.hqp^T.xi + p.hpp.p],  p = -i d/dxi,
/// assembled from exact ladder-operator matrix elements.
FiberOperator quadratic_hamiltonian(const RMat& hqq, const RMat& hqp,
                                    const RMat& hpp, const FiberDims& dims);

/// Truncated xi_j and p_j matrices (projections of the exact operators).
CMat position_matrix(const FiberDims& dims, int j);
CMat momentum_matrix(const FiberDims& dims, int j);

/// (-1)^{total degree} on the diagonal.
CMat parity_matrix(const FiberDims& dims);

/// Components whose total degree is within `width` of the cutoff; these feel
/// the truncation and are excluded by spectral tests.
std::vector<bool> truncation_edge(const FiberDims& dims, int width);

/// Normalized 1-D Hermite functions h_0..h_{count-1} at xi.
RVec hermite_functions(double xi, int count);

}  // namespace scb
