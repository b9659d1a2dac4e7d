#pragma once

#include <cstddef>
#include <functional>

#include "dcca/matrix.hpp"

namespace dcca {

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, vectors.col(k) pairs with values[k]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Throws ShapeError if the input is not square or not symmetric within
/// 1e-9 * max|A|.
SymEig sym_eig(const Matrix& a);

struct Svd {
  Matrix u;      // left singular vectors (columns)
  Vector sigma;  // descending, length min(rows, cols)
  Matrix v;      // right singular vectors (columns)
};

/// Singular value decomposition by one-sided Jacobi orthogonalization.
/// full=false: u is rows x min, v is cols x min.
/// full=true:  u is rows x rows and v is cols x cols; columns beyond
/// min(rows, cols) are an orthonormal completion (singular value zero).
/// Sign convention: the first nonzero entry of each left vector is positive,
/// the paired right vector is flipped with it.
Svd svd(const Matrix& m, bool full = false);

/// Top-L slice of svd(). Throws ArgumentError when L > min(rows, cols).
Svd truncated_svd(const Matrix& m, std::size_t l);

/// B with B A B = I. Throws NearSingularError when the smallest eigenvalue
/// falls below 1e-10 * largest: degenerate metrics are caller bugs, not
/// something to clamp silently.
Matrix inv_sqrt(const SpdMatrix& a);

/// Symmetric square root A^{1/2}.
Matrix spd_sqrt(const SpdMatrix& a);

/// Column-orthonormalization (modified Gram-Schmidt with one
/// re-orthogonalization pass). Throws DegenerateInputError on rank-deficient
/// input.
Matrix gram_schmidt(const Matrix& m);

/// Lower-triangular L with L L^T = A. Throws NearSingularError (carrying the
/// offending pivot) when A is not positive definite.
Matrix cholesky(const SpdMatrix& a);

/// Solves L L^T x = b given the Cholesky factor.
Vector cholesky_solve(const Matrix& l, const Vector& b);

using LinOp = std::function<void(const Vector&, Vector&)>;

/// Conjugate gradient for an SPD operator given only through mat-vecs.
/// Terminates when ||r|| <= tol * ||b||; throws ConvergenceError (carrying the
/// final residual) after max_iters.
Vector cg_solve(const LinOp& apply, const Vector& b, double tol = 1e-10,
                std::size_t max_iters = 0 /* 0 -> 10 * dim */);

/// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace dcca
