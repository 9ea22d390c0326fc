#pragma once

// Dense complex linear algebra for small (n <= 64) problems: the Hermitian
// eigensolver behind the subspace estimators, Cholesky-based solves for MVDR,
// and a general eigenvalue routine for the ESPRIT rotation operator.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "siir/error.hpp"

namespace siir {

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;

// Column-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols, cdouble fill = {})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const cdouble> d);
  static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cdouble>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  cdouble& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  const cdouble& operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  std::span<cdouble> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const cdouble> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

  cdouble* data() noexcept { return data_.data(); }
  const cdouble* data() const noexcept { return data_.data(); }

  ComplexMatrix adjoint() const;
  double max_abs() const;
  cdouble trace() const;
  // max |M - M^H| over all entries; infinite for non-square matrices.
  double hermitian_defect() const;
  bool is_hermitian(double tol = 1e-12) const { return hermitian_defect() <= tol; }

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cdouble s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cdouble> data_;
};

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(cdouble s, ComplexMatrix a);
CVector operator*(const ComplexMatrix& a, std::span<const cdouble> x);

double norm2(std::span<const cdouble> x);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  ComplexMatrix vectors;       // unitary, eigenvectors in columns
};

// Cyclic complex Jacobi. Throws not_hermitian / no_convergence.
EigenDecomposition hermitian_eig(const ComplexMatrix& m, double hermitian_tol = 1e-12);

// Cholesky factorization A = L L^H of a Hermitian positive-definite matrix.
class Cholesky {
 public:
  // Throws singular_matrix when A is not numerically positive definite
  // (smallest eigenvalue below 1e-12 of the largest).
  explicit Cholesky(const ComplexMatrix& a);

  std::size_t size() const noexcept { return l_.rows(); }
  CVector solve(std::span<const cdouble> b) const;
  ComplexMatrix inverse() const;
  const ComplexMatrix& factor() const noexcept { return l_; }

 private:
  ComplexMatrix l_;
};

CVector hermitian_solve(const ComplexMatrix& a, std::span<const cdouble> b);
ComplexMatrix hermitian_inverse(const ComplexMatrix& a);

// Eigenvalues of a general complex square matrix (n <= 8) via Hessenberg
// reduction and single-shift QR. Order is unspecified.
CVector small_general_eigenvalues(const ComplexMatrix& m);

// Least-squares solution of A X = B for full-column-rank A (Householder QR).
// Throws singular_matrix when A is rank deficient.
ComplexMatrix least_squares(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace siir
