#pragma once

// Dense linear algebra for the small symmetric positive-definite matrices that
// parameterize Gaussian families. Everything here is a value type; nothing
// holds shared mutable state.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ckit {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_nested(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::vector<std::vector<double>> to_nested() const;

  Matrix transpose() const;
  double trace() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
Matrix outer(std::span<const double> a, std::span<const double> b);
double frobenius_norm(const Matrix& m);
/// (M + M^T) / 2
Matrix symmetrized(const Matrix& m);

/// Symmetric positive-definite matrix. Construction symmetrizes the input,
/// rejects asymmetry above 1e-8 relative, and requires a Cholesky factor to
/// exist; the factor is kept for later solves and determinants.
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& m);
  SpdMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : SpdMatrix(Matrix(rows)) {}

  static SpdMatrix identity(std::size_t n) { return SpdMatrix(Matrix::identity(n)); }
  static SpdMatrix diagonal(std::span<const double> diag) {
    return SpdMatrix(Matrix::diagonal(diag));
  }

  std::size_t dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  const Matrix& lower() const noexcept { return chol_; }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  Matrix m_;
  Matrix chol_;
};

struct SymEigen {
  Vector values;  // ascending
  Matrix vectors; // column k pairs with values[k]
};

/// Lower-triangular L with L L^T = m.
Matrix cholesky(const SpdMatrix& m);
/// Factorizes a raw symmetric matrix; throws NotPositiveDefinite when a pivot
/// falls to 1e-13 * trace / dim or below.
Matrix cholesky_factor(const Matrix& m);

double log_det(const SpdMatrix& m);
SpdMatrix spd_inverse(const SpdMatrix& m);
SpdMatrix sym_sqrt(const SpdMatrix& m);
/// m^{-1/2}, the inverse of the symmetric square root.
SpdMatrix sym_inv_sqrt(const SpdMatrix& m);

/// Solves m x = b through the cached Cholesky factor.
Vector solve(const SpdMatrix& m, std::span<const double> b);
/// b^T m^{-1} b
double inverse_quadratic_form(const SpdMatrix& m, std::span<const double> b);

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
SymEigen eig_sym(const Matrix& m);
Vector eigvals_sym(const Matrix& m);

/// Eigenvalues of b^{-1/2} a b^{-1/2}, i.e. the spectrum of a b^{-1}, ascending.
Vector generalized_spectrum(const SpdMatrix& a, const SpdMatrix& b);

/// S^T m S for symmetric m; the result is symmetrized.
Matrix congruence(const Matrix& s, const Matrix& m);

}  // namespace ckit
