#include "dcca/matrix.hpp"

#include <cmath>
#include <cstring>

#include "dcca/errors.hpp"
#include "dcca/kernels.hpp"

namespace dcca {

namespace ker = kernels;

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::col(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_col(std::size_t j, const Vector& v) {
  if (v.size() != rows_) throw ShapeError("set_col: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

bool Matrix::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::fabs(x));
  return m;
}

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw ShapeError("SpdMatrix: not square");
  const double scale = m_.max_abs();
  const double tol = 1e-10 * (scale > 0 ? scale : 1.0);
  for (std::size_t i = 0; i < m_.rows(); ++i)
    for (std::size_t j = i + 1; j < m_.cols(); ++j)
      if (std::fabs(m_(i, j) - m_(j, i)) > tol)
        throw ShapeError("SpdMatrix: input not symmetric within tolerance");
  if (!m_.all_finite()) throw ArgumentError("SpdMatrix: non-finite entries");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  // c.row(i) += a(i,r) * b.row(r): contiguous inner loop.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::size_t r = 0; r < a.cols(); ++r) {
      if (ai[r] != 0.0) ker::axpy(ai[r], b.row(r), ci, b.cols());
    }
  }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_tn: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* ar = a.row(r);
    const double* br = b.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      if (ar[i] != 0.0) ker::axpy(ar[i], br, c.row(i), b.cols());
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: column counts differ");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) ci[j] = ker::dot(a.row(i), b.row(j), a.cols());
  }
  return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw ShapeError("matvec: length mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = ker::dot(a.row(i), x.data(), a.cols());
  return y;
}

Vector matvec_t(const Matrix& a, const Vector& x) {
  if (a.rows() != x.size()) throw ShapeError("matvec_t: length mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (x[i] != 0.0) ker::axpy(x[i], a.row(i), y.data(), a.cols());
  }
  return y;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  ker::scal(s, c.data(), c.rows() * c.cols());
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("matrix add: shape mismatch");
  Matrix c = a;
  ker::axpy(1.0, b.data(), c.data(), c.rows() * c.cols());
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("matrix sub: shape mismatch");
  Matrix c = a;
  ker::axpy(-1.0, b.data(), c.data(), c.rows() * c.cols());
  return c;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  return ker::dot(a.data(), b.data(), a.size());
}

double norm(const Vector& a) { return std::sqrt(ker::dot(a.data(), a.data(), a.size())); }

void axpy_into(double alpha, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw ShapeError("axpy: length mismatch");
  ker::axpy(alpha, x.data(), y.data(), x.size());
}

void scale(Vector& x, double alpha) { ker::scal(alpha, x.data(), x.size()); }

Vector concat(const Vector& a, const Vector& b) {
  Vector c;
  c.reserve(a.size() + b.size());
  c.insert(c.end(), a.begin(), a.end());
  c.insert(c.end(), b.begin(), b.end());
  return c;
}

double bilinear(const Vector& x, const Matrix& a, const Vector& y) {
  return dot(x, matvec(a, y));
}

}  // namespace dcca
