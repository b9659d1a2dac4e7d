#pragma once

#include <cstddef>
#include <vector>

namespace dcca {

using Vector = std::vector<double>;

/// Dense real matrix, row-major storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Vector col(std::size_t j) const;
  void set_col(std::size_t j, const Vector& v);

  bool all_finite() const;
  double max_abs() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vector data_;
};

/// A dense matrix asserted symmetric (||A - A^T||_max <= 1e-10 ||A||_max)
/// at construction. Positive definiteness is checked where factorized.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(Matrix m);

  std::size_t dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  Matrix m_;
};

// ---- products (all funnel through the kernel layer) ----

Matrix matmul(const Matrix& a, const Matrix& b);     // A B
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // A^T B
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // A B^T
Vector matvec(const Matrix& a, const Vector& x);     // A x
Vector matvec_t(const Matrix& a, const Vector& x);   // A^T x

Matrix transpose(const Matrix& a);
Matrix operator*(double s, const Matrix& a);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);

// ---- vector helpers ----

double dot(const Vector& a, const Vector& b);
double norm(const Vector& a);
void axpy_into(double alpha, const Vector& x, Vector& y);  // y += alpha x
void scale(Vector& x, double alpha);
Vector concat(const Vector& a, const Vector& b);

/// Quadratic/bilinear form x^T A y.
double bilinear(const Vector& x, const Matrix& a, const Vector& y);

}  // namespace dcca
