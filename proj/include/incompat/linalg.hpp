// Copyright 2026 The incompat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "incompat/error.hpp"

namespace incompat {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline CMatrix identity(Eigen::Index d) { return CMatrix::Identity(d, d); }

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// Largest entry modulus; the norm every entrywise tolerance in the library uses.
inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const CMatrix& m, double tol = hermitian_tolerance()) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

inline CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

inline void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionError(std::string(what) + ": matrix must be square and nonempty");
}

inline void require_hermitian(const CMatrix& m, const char* what,
                              double tol = hermitian_tolerance()) {
  require_square(m, what);
  if (!is_hermitian(m, tol)) throw ValueError(std::string(what) + ": matrix is not Hermitian");
}

/// Kronecker product a ⊗ b.
inline CMatrix tensor(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CMatrix tensor(std::span<const CMatrix> factors) {
  if (factors.empty()) return CMatrix::Identity(1, 1);
  CMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k]);
  return out;
}

inline long checked_product(std::span<const int> dims) {
  long total = 1;
  for (int d : dims) {
    if (d < 1) throw DimensionError("factor dimensions must be positive");
    total *= d;
  }
  return total;
}

/// Trace over every tensor factor except `keep`.
inline CMatrix partial_trace(const CMatrix& m, std::span<const int> dims, int keep) {
  require_square(m, "partial_trace");
  const long total = checked_product(dims);
  if (total != m.rows())
    throw DimensionError("partial_trace: product of factor dimensions does not match matrix");
  if (keep < 0 || keep >= static_cast<int>(dims.size()))
    throw DimensionError("partial_trace: kept factor index out of range");

  // Row index = (outer, k, inner) with k the kept factor's digit.
  long outer = 1, inner = 1;
  for (int f = 0; f < keep; ++f) outer *= dims[f];
  for (std::size_t f = keep + 1; f < dims.size(); ++f) inner *= dims[f];
  const int dk = dims[keep];

  CMatrix out = CMatrix::Zero(dk, dk);
  for (long o = 0; o < outer; ++o)
    for (long in = 0; in < inner; ++in)
      for (int i = 0; i < dk; ++i)
        for (int j = 0; j < dk; ++j)
          out(i, j) += m((o * dk + i) * inner + in, (o * dk + j) * inner + in);
  return out;
}

/// Transpose of one tensor factor (the PPT test uses factor 1 of a bipartite Choi matrix).
inline CMatrix partial_transpose(const CMatrix& m, std::span<const int> dims, int factor) {
  require_square(m, "partial_transpose");
  if (checked_product(dims) != m.rows())
    throw DimensionError("partial_transpose: product of factor dimensions does not match matrix");
  if (factor < 0 || factor >= static_cast<int>(dims.size()))
    throw DimensionError("partial_transpose: factor index out of range");
  long inner = 1;
  for (std::size_t f = factor + 1; f < dims.size(); ++f) inner *= dims[f];
  const long dk = dims[factor];

  CMatrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const long rk = (r / inner) % dk;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const long ck = (c / inner) % dk;
      const Eigen::Index r2 = r + (ck - rk) * inner;
      const Eigen::Index c2 = c + (rk - ck) * inner;
      out(r, c) = m(r2, c2);
    }
  }
  return out;
}

struct HermitianEigen {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors
};

inline HermitianEigen eig_hermitian(const CMatrix& m) {
  require_hermitian(m, "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) throw ValueError("eig_hermitian: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Smallest eigenvalue of the Hermitian part; no Hermiticity check, used in hot loops.
inline double min_eigenvalue(const CMatrix& m) {
  if (m.rows() == 1) return m(0, 0).real();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

/// Nearest PSD matrix in Frobenius norm: clip negative eigenvalues at zero.
inline CMatrix psd_project(const CMatrix& m) {
  auto [values, vectors] = eig_hermitian(m);
  if (values(0) >= 0) return hermitian_part(m);
  RVector clipped = values.cwiseMax(0.0);
  return vectors * clipped.cast<Complex>().asDiagonal() * vectors.adjoint();
}

inline long factorial(int n) {
  long f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

inline long binomial(long n, long k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline long checked_power(int d, int n) {
  long total = 1;
  for (int k = 0; k < n; ++k) {
    total *= d;
    if (total > dimension_cap())
      throw ResourceError("tensor power " + std::to_string(d) + "^" + std::to_string(n) +
                          " exceeds dimension cap " + std::to_string(dimension_cap()));
  }
  return total;
}

/// Operator permuting the n tensor factors of (C^d)^{⊗n}: factor k of the
/// input lands in slot perm[k] of the output.
inline CMatrix permutation_operator(int d, std::span<const int> perm) {
  const int n = static_cast<int>(perm.size());
  const long dim = checked_power(d, n);
  std::vector<int> digits(n), moved(n);
  CMatrix p = CMatrix::Zero(dim, dim);
  for (long col = 0; col < dim; ++col) {
    long rest = col;
    for (int k = n - 1; k >= 0; --k) {
      digits[k] = static_cast<int>(rest % d);
      rest /= d;
    }
    for (int k = 0; k < n; ++k) moved[perm[k]] = digits[k];
    long row = 0;
    for (int k = 0; k < n; ++k) row = row * d + moved[k];
    p(row, col) = 1.0;
  }
  return p;
}

/// Projector onto the symmetric subspace of (C^d)^{⊗n}, as the average of all
/// n! factor permutations.
inline CMatrix symmetric_projector(int d, int n) {
  if (d < 1 || n < 1) throw ValueError("symmetric_projector: d and n must be positive");
  const long dim = checked_power(d, n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  CMatrix sum = CMatrix::Zero(dim, dim);
  do {
    sum += permutation_operator(d, perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum / static_cast<double>(factorial(n));
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal moved into Q.
template <class Rng>
CMatrix haar_unitary(int d, Rng& rng) {
  if (d < 1) throw ValueError("haar_unitary: dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (int j = 0; j < d; ++j) {
    const double mod = std::abs(r(j, j));
    const Complex phase = mod > 0 ? r(j, j) / mod : Complex(1.0);
    q.col(j) *= phase;
  }
  return q;
}

/// Uniform unit vector in C^d: the first column of a Haar unitary, sampled
/// directly as a normalized complex Gaussian vector.
template <class Rng>
CVector haar_state(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(d);
  for (int i = 0; i < d; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v(i) = Complex(re, im);
  }
  return v / v.norm();
}

inline CMatrix projector(const CVector& v) { return v * v.adjoint(); }

}  // namespace incompat
