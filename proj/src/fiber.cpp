#include "scb/fiber.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>

#include "scb/errors.hpp"

namespace scb {

namespace {

struct BasisTable {
  std::vector<std::vector<int>> indices;
  std::map<std::vector<int>, int> position;
};

const BasisTable& table(const FiberDims& dims) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, BasisTable> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(dims.n, dims.ncut);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  BasisTable t;
  for (int degree = 0; degree < dims.ncut; ++degree) {
    // All multi-indices of this total degree, lexicographically descending.
    std::vector<int> idx(dims.n, 0);
    std::function<void(int, int)> fill = [&](int slot, int remaining) {
      if (slot == dims.n - 1) {
        idx[slot] = remaining;
        t.position[idx] = static_cast<int>(t.indices.size());
        t.indices.push_back(idx);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        idx[slot] = v;
        fill(slot + 1, remaining - v);
      }
    };
    fill(0, degree);
  }
  return cache.emplace(key, std::move(t)).first->second;
}

void check_dims(const FiberDims& dims) {
  if (dims.n < 1 || dims.ncut < 1) throw InputError("fiber dimensions must be positive");
}

// A ladder monomial acting on a basis ket: coefficient and resulting index.
struct Ket {
  cplx coef;
  std::vector<int> index;
};

// Linear combination of a_j and a_j^dagger: c_lower a_j + c_raise a_j^dagger.
struct Linear {
  int j;
  cplx lower;
  cplx raise;
};

Linear xi_op(int j) { return {j, 1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2}; }
Linear p_op(int j) { return {j, cplx(0.0, -1.0 / std::numbers::sqrt2), cplx(0.0, 1.0 / std::numbers::sqrt2)}; }

std::vector<Ket> apply_linear(const Linear& op, const std::vector<Ket>& in) {
  std::vector<Ket> out;
  for (const auto& k : in) {
    const int m = k.index[op.j];
    if (m > 0) {
      Ket down = k;
      down.index[op.j] -= 1;
      down.coef *= op.lower * std::sqrt(static_cast<double>(m));
      out.push_back(std::move(down));
    }
    Ket up = k;
    up.index[op.j] += 1;
    up.coef *= op.raise * std::sqrt(static_cast<double>(m + 1));
    out.push_back(std::move(up));
  }
  return out;
}

// Adds weight * <.|A B|.> into m, using the untruncated action of A B.
void accumulate_product(CMat& m, const FiberDims& dims, const Linear& a,
                        const Linear& b, double weight) {
  if (weight == 0.0) return;
  const auto& t = table(dims);
  for (int col = 0; col < static_cast<int>(t.indices.size()); ++col) {
    auto kets = apply_linear(a, apply_linear(b, {{1.0, t.indices[col]}}));
    for (const auto& k : kets) {
      auto it = t.position.find(k.index);
      if (it != t.position.end()) m(it->second, col) += weight * k.coef;
    }
  }
}

CMat single_operator(const FiberDims& dims, const Linear& op) {
  check_dims(dims);
  const auto& t = table(dims);
  CMat m = CMat::Zero(dims.size(), dims.size());
  for (int col = 0; col < static_cast<int>(t.indices.size()); ++col) {
    for (const auto& k : apply_linear(op, {{1.0, t.indices[col]}})) {
      auto it = t.position.find(k.index);
      if (it != t.position.end()) m(it->second, col) += k.coef;
    }
  }
  return m;
}

}  // namespace

int FiberDims::size() const {
  check_dims(*this);
  return static_cast<int>(table(*this).indices.size());
}

const std::vector<std::vector<int>>& basis_indices(const FiberDims& dims) {
  check_dims(dims);
  return table(dims).indices;
}

int basis_position(const FiberDims& dims, const std::vector<int>& multi_index) {
  const auto& t = table(dims);
  auto it = t.position.find(multi_index);
  return it == t.position.end() ? -1 : it->second;
}

FiberVector FiberVector::zero(const FiberDims& dims) {
  return {CVec::Zero(dims.size()), dims};
}

FiberVector FiberVector::basis(const FiberDims& dims, int k) {
  FiberVector v = zero(dims);
  if (k < 0 || k >= v.coeffs.size()) throw InputError("basis index out of range");
  v.coeffs(k) = 1.0;
  return v;
}

FiberVector FiberVector::operator+(const FiberVector& o) const {
  if (!(dims == o.dims)) throw InputError("fiber dimension mismatch");
  return {coeffs + o.coeffs, dims};
}

FiberVector FiberVector::operator-(const FiberVector& o) const {
  if (!(dims == o.dims)) throw InputError("fiber dimension mismatch");
  return {coeffs - o.coeffs, dims};
}

FiberVector FiberVector::operator*(cplx s) const { return {coeffs * s, dims}; }

FiberOperator FiberOperator::identity(const FiberDims& dims) {
  return {CMat::Identity(dims.size(), dims.size()), true, true};
}

FiberVector FiberOperator::apply(const FiberVector& v) const {
  if (matrix.cols() != v.coeffs.size()) throw InputError("operator/vector dimension mismatch");
  return {matrix * v.coeffs, v.dims};
}

FiberOperator FiberOperator::operator*(const FiberOperator& o) const {
  if (matrix.cols() != o.matrix.rows()) throw InputError("operator dimension mismatch");
  return {matrix * o.matrix, false, unitary && o.unitary};
}

cplx inner(const FiberVector& phi, const FiberVector& psi) {
  if (!(phi.dims == psi.dims) || phi.coeffs.size() != psi.coeffs.size()) {
    throw InputError("inner: fiber dimension mismatch");
  }
  return phi.coeffs.dot(psi.coeffs);  // Eigen's dot conjugates the left side
}

double unitarity_residual(const FiberOperator& u) { return unitarity_defect(u.matrix); }

FiberOperator quadratic_hamiltonian(const RMat& hqq, const RMat& hqp,
                                    const RMat& hpp, const FiberDims& dims) {
  check_dims(dims);
  const int n = dims.n;
  auto square = [n](const RMat& m) { return m.rows() == n && m.cols() == n; };
  if (!square(hqq) || !square(hqp) || !square(hpp)) throw InputError("Hessian blocks must be n x n");
  if (!hqq.allFinite() || !hqp.allFinite() || !hpp.allFinite()) throw InputError("non-finite Hessian entry");
  if ((hqq - hqq.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InputError("H_QQ is not symmetric");
  if ((hpp - hpp.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InputError("H_PP is not symmetric");

  CMat m = CMat::Zero(dims.size(), dims.size());
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      accumulate_product(m, dims, xi_op(j), xi_op(k), 0.5 * hqq(j, k));
      accumulate_product(m, dims, xi_op(j), p_op(k), 0.5 * hqp(j, k));
      accumulate_product(m, dims, p_op(k), xi_op(j), 0.5 * hqp(j, k));
      accumulate_product(m, dims, p_op(j), p_op(k), 0.5 * hpp(j, k));
    }
  }
  m = 0.5 * (m + m.adjoint()).eval();
  return {m, true, false};
}

CMat position_matrix(const FiberDims& dims, int j) { return single_operator(dims, xi_op(j)); }

CMat momentum_matrix(const FiberDims& dims, int j) { return single_operator(dims, p_op(j)); }

CMat parity_matrix(const FiberDims& dims) {
  const auto& idx = basis_indices(dims);
  CMat p = CMat::Zero(dims.size(), dims.size());
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
    int degree = 0;
    for (int v : idx[i]) degree += v;
    p(i, i) = (degree % 2 == 0) ? 1.0 : -1.0;
  }
  return p;
}

std::vector<bool> truncation_edge(const FiberDims& dims, int width) {
  const auto& idx = basis_indices(dims);
  std::vector<bool> edge(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    int degree = 0;
    for (int v : idx[i]) degree += v;
    edge[i] = degree >= dims.ncut - width;
  }
  return edge;
}

RVec hermite_functions(double xi, int count) {
  RVec h(std::max(count, 0));
  if (count <= 0) return h;
  h(0) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
  if (count > 1) h(1) = std::numbers::sqrt2 * xi * h(0);
  for (int k = 2; k < count; ++k) {
    h(k) = std::sqrt(2.0 / k) * xi * h(k - 1) - std::sqrt((k - 1.0) / k) * h(k - 2);
  }
  return h;
}

}  // namespace scb
