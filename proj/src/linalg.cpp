#include "ckit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "ckit/errors.hpp"

namespace ckit {

namespace {

constexpr double kAsymmetryTol = 1e-8;
constexpr double kPivotRelTol = 1e-13;
constexpr int kMaxJacobiSweeps = 100;

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("{}x{} vs {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  }
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::DimMismatch, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::from_nested(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t c = n ? rows.front().size() : 0;
  Matrix m(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != c) {
      throw Error(ErrorCode::DimMismatch,
                  fmt::format("row {} has {} entries, expected {}", i, rows[i].size(), c));
    }
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_nested() const {
  std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i][j] = (*this)(i, j);
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("product of {}x{} and {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("{}x{} matrix times vector of length {}", a.rows(), a.cols(), x.size()));
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch, fmt::format("dot of lengths {} and {}", a.size(), b.size()));
  }
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

Matrix outer(std::span<const double> a, std::span<const double> b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

Matrix symmetrized(const Matrix& m) {
  Matrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

SpdMatrix::SpdMatrix(const Matrix& m) {
  if (!m.square() || m.rows() == 0) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("SPD matrix must be square and non-empty, got {}x{}", m.rows(), m.cols()));
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      const double a = m(i, j);
      const double b = m(j, i);
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw Error(ErrorCode::NotPositiveDefinite, "non-finite entry");
      }
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(a - b) > kAsymmetryTol * scale) {
        throw Error(ErrorCode::NotSymmetric,
                    fmt::format("entries ({},{})={} and ({},{})={} differ", i, j, a, j, i, b));
      }
    }
  }
  m_ = symmetrized(m);
  chol_ = cholesky_factor(m_);
}

Matrix cholesky_factor(const Matrix& m) {
  const std::size_t n = m.rows();
  const double tr = m.trace();
  const double pivot_floor = kPivotRelTol * std::abs(tr) / static_cast<double>(n);
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > pivot_floor) || !(tr > 0.0)) {
      throw Error(ErrorCode::NotPositiveDefinite, fmt::format("pivot {} is {}", j, d));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix cholesky(const SpdMatrix& m) { return m.lower(); }

double log_det(const SpdMatrix& m) {
  const Matrix& l = m.lower();
  double s = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) s += std::log(l(i, i));
  return 2.0 * s;
}

namespace {

// Forward then backward substitution with the Cholesky factor.
void chol_solve_inplace(const Matrix& l, std::span<double> x) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
}

}  // namespace

Vector solve(const SpdMatrix& m, std::span<const double> b) {
  if (b.size() != m.dim()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("solve with {}x{} matrix and vector of length {}", m.dim(), m.dim(), b.size()));
  }
  Vector x(b.begin(), b.end());
  chol_solve_inplace(m.lower(), x);
  return x;
}

double inverse_quadratic_form(const SpdMatrix& m, std::span<const double> b) {
  if (b.size() != m.dim()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("quadratic form with {}x{} matrix and vector of length {}", m.dim(), m.dim(), b.size()));
  }
  // ||L^{-1} b||^2
  const Matrix& l = m.lower();
  Vector y(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    double v = y[i];
    for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * y[k];
    y[i] = v / l(i, i);
    s += y[i] * y[i];
  }
  return s;
}

SpdMatrix spd_inverse(const SpdMatrix& m) {
  const std::size_t n = m.dim();
  Matrix inv(n, n);
  Vector col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    chol_solve_inplace(m.lower(), col);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return SpdMatrix(symmetrized(inv));
}

SymEigen eig_sym(const Matrix& m) {
  if (!m.square()) {
    throw Error(ErrorCode::DimMismatch, fmt::format("eigenproblem on {}x{} matrix", m.rows(), m.cols()));
  }
  const std::size_t n = m.rows();
  Matrix a = symmetrized(m);
  Matrix v = Matrix::identity(n);

  const double scale = std::max(frobenius_norm(a), 1e-300);
  bool converged = (n <= 1);
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) > 1e-12 * scale) {
      throw Error(ErrorCode::ConvergenceFailure,
                  fmt::format("Jacobi did not converge in {} sweeps", kMaxJacobiSweeps));
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymEigen out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

Vector eigvals_sym(const Matrix& m) { return eig_sym(m).values; }

namespace {

template <typename Fn>
SpdMatrix spectral_map(const SpdMatrix& m, Fn fn) {
  const SymEigen e = eig_sym(m.matrix());
  const std::size_t n = m.dim();
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(e.values[k] > 0.0)) {
      throw Error(ErrorCode::NotPositiveDefinite, fmt::format("eigenvalue {} is {}", k, e.values[k]));
    }
    const double f = fn(e.values[k]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += f * e.vectors(i, k) * e.vectors(j, k);
  }
  return SpdMatrix(symmetrized(out));
}

}  // namespace

SpdMatrix sym_sqrt(const SpdMatrix& m) {
  return spectral_map(m, [](double x) { return std::sqrt(x); });
}

SpdMatrix sym_inv_sqrt(const SpdMatrix& m) {
  return spectral_map(m, [](double x) { return 1.0 / std::sqrt(x); });
}

Matrix congruence(const Matrix& s, const Matrix& m) {
  return symmetrized(s.transpose() * m * s);
}

Vector generalized_spectrum(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch, fmt::format("dimensions {} and {}", a.dim(), b.dim()));
  }
  const SpdMatrix w = sym_sqrt(spd_inverse(b));
  Vector lam = eigvals_sym(congruence(w.matrix(), a.matrix()));
  for (double l : lam) {
    if (!(l > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "non-positive generalized eigenvalue");
  }
  return lam;
}

}  // namespace ckit
