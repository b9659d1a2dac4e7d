#include "dcca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dcca/errors.hpp"
#include "dcca/kernels.hpp"

namespace dcca {

namespace ker = kernels;

namespace {

void require_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) throw ShapeError(std::string(who) + ": matrix not square");
  const double scale = a.max_abs();
  const double tol = 1e-9 * (scale > 0 ? scale : 1.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::fabs(a(i, j) - a(j, i)) > tol)
        throw ShapeError(std::string(who) + ": matrix not symmetric within tolerance");
}

// Makes the first significant entry of u-column j positive; the paired
// v-column follows. Columns are significant above 1e-12 of the column peak.
void fix_signs(Matrix& u, Matrix& v) {
  const std::size_t pairs = std::min(u.cols(), v.cols());
  for (std::size_t j = 0; j < u.cols(); ++j) {
    double peak = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) peak = std::max(peak, std::fabs(u(i, j)));
    if (peak == 0.0) continue;
    double lead = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) {
      if (std::fabs(u(i, j)) > 1e-12 * peak) {
        lead = u(i, j);
        break;
      }
    }
    if (lead >= 0.0) continue;
    for (std::size_t i = 0; i < u.rows(); ++i) u(i, j) = -u(i, j);
    if (j < pairs)
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, j) = -v(i, j);
  }
}

// Extends the first `have` orthonormal rows of `basis` (rows x n, rows >= have)
// to a full orthonormal set, seeding candidates from identity vectors.
void complete_orthonormal_rows(Matrix& basis, std::size_t have) {
  const std::size_t n = basis.cols();
  std::size_t next = have;
  for (std::size_t e = 0; e < n && next < basis.rows(); ++e) {
    Vector cand(n, 0.0);
    cand[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < next; ++i) {
        const double c = ker::dot(basis.row(i), cand.data(), n);
        ker::axpy(-c, basis.row(i), cand.data(), n);
      }
    const double nn = std::sqrt(ker::dot(cand.data(), cand.data(), n));
    if (nn < 1e-8) continue;  // identity vector already inside the span
    ker::scal(1.0 / nn, cand.data(), n);
    std::copy(cand.begin(), cand.end(), basis.row(next));
    ++next;
  }
  if (next < basis.rows()) throw DegenerateInputError("orthonormal completion failed");
}

}  // namespace

SymEig sym_eig(const Matrix& a_in) {
  require_symmetric(a_in, "sym_eig");
  const std::size_t n = a_in.rows();
  Matrix a = a_in;
  Matrix vt = Matrix::identity(n);  // accumulated as rows: vt.row(k) = eigenvector k

  const double scale = a.max_abs();
  if (scale == 0.0) {
    SymEig out;
    out.values.assign(n, 0.0);
    out.vectors = Matrix::identity(n);
    return out;
  }

  const double stop = 1e-15 * scale;
  const std::size_t max_sweeps = 100;
  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a(p, q)));
    if (off <= stop) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= stop * 1e-2) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J: rotate rows p,q, then columns p,q.
        ker::rot(a.row(p), a.row(q), c, s, n);
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        ker::rot(vt.row(p), vt.row(q), c, s, n);
      }
    }
  }
  if (sweep == max_sweeps) throw ConvergenceError("sym_eig: Jacobi sweeps exhausted", 0.0, sweep);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymEig out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    const double* v = vt.row(order[k]);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::fabs(v[i]));
    double lead = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (std::fabs(v[i]) > 1e-12 * peak) {
        lead = v[i];
        break;
      }
    const double sign = (lead < 0.0) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v[i];
  }
  return out;
}

namespace {

// One-sided Jacobi on a tall matrix (rows >= cols). Returns thin U via `wt`
// (rows of wt end up as scaled left vectors), sigma, and square V^T.
struct OneSided {
  Matrix wt;  // cols x rows, row k = k-th column of the working matrix
  Matrix vt;  // cols x cols
  Vector sigma;
};

OneSided one_sided_jacobi(const Matrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  OneSided r;
  r.wt = transpose(m);
  r.vt = Matrix::identity(cols);
  r.sigma.assign(cols, 0.0);

  const double eps = 1e-14;
  const std::size_t max_sweeps = 100;
  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double* wp = r.wt.row(p);
        double* wq = r.wt.row(q);
        const double app = ker::dot(wp, wp, rows);
        const double aqq = ker::dot(wq, wq, rows);
        const double apq = ker::dot(wp, wq, rows);
        if (std::fabs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(zeta * zeta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        ker::rot(wp, wq, c, s, rows);
        ker::rot(r.vt.row(p), r.vt.row(q), c, s, cols);
      }
    }
    if (!rotated) break;
  }
  if (sweep == max_sweeps)
    throw ConvergenceError("svd: Jacobi sweeps exhausted", 0.0, sweep);

  for (std::size_t k = 0; k < cols; ++k)
    r.sigma[k] = std::sqrt(ker::dot(r.wt.row(k), r.wt.row(k), rows));
  return r;
}

}  // namespace

Svd svd(const Matrix& m, bool full) {
  if (m.rows() == 0 || m.cols() == 0) throw ShapeError("svd: empty matrix");
  if (m.rows() < m.cols()) {
    Svd t = svd(transpose(m), full);
    Svd out;
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    out.sigma = std::move(t.sigma);
    fix_signs(out.u, out.v);
    return out;
  }

  const std::size_t rows = m.rows(), cols = m.cols();
  OneSided os = one_sided_jacobi(m);

  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return os.sigma[i] > os.sigma[j]; });

  Svd out;
  out.sigma.resize(cols);
  out.v = Matrix(cols, cols);
  const std::size_t ucols = full ? rows : cols;

  // Left vectors held as rows first (contiguous), transposed at the end.
  Matrix ut(ucols, rows);
  const double sig_floor = (os.sigma[order[0]] > 0 ? os.sigma[order[0]] : 1.0) * 1e-13;
  std::size_t resolved = 0;
  for (std::size_t k = 0; k < cols; ++k) {
    const std::size_t src = order[k];
    out.sigma[k] = os.sigma[src];
    for (std::size_t i = 0; i < cols; ++i) out.v(i, k) = os.vt(src, i);
    if (out.sigma[k] > sig_floor) {
      const double inv = 1.0 / out.sigma[k];
      for (std::size_t i = 0; i < rows; ++i) ut(k, i) = os.wt(src, i) * inv;
      resolved = k + 1;
    }
  }
  // Columns with negligible singular value carry no direction information in
  // the working matrix; rebuild them (and any full-SVD padding) by completion.
  complete_orthonormal_rows(ut, resolved);

  out.u = transpose(ut);
  fix_signs(out.u, out.v);
  return out;
}

Svd truncated_svd(const Matrix& m, std::size_t l) {
  const std::size_t r = std::min(m.rows(), m.cols());
  if (l < 1 || l > r) throw ArgumentError("truncated_svd: L out of range");
  Svd f = svd(m, false);
  Svd out;
  out.sigma.assign(f.sigma.begin(), f.sigma.begin() + static_cast<std::ptrdiff_t>(l));
  out.u = Matrix(m.rows(), l);
  out.v = Matrix(m.cols(), l);
  for (std::size_t j = 0; j < l; ++j) {
    for (std::size_t i = 0; i < m.rows(); ++i) out.u(i, j) = f.u(i, j);
    for (std::size_t i = 0; i < m.cols(); ++i) out.v(i, j) = f.v(i, j);
  }
  return out;
}

namespace {

Matrix spd_power(const SpdMatrix& a, double exponent, const char* who) {
  SymEig eig = sym_eig(a.mat());
  const std::size_t n = a.dim();
  const double lmax = eig.values.front();
  if (lmax <= 0.0)
    throw NearSingularError(std::string(who) + ": matrix not positive definite", eig.values.back());
  const double floor = 1e-10 * lmax;
  if (eig.values.back() < floor)
    throw NearSingularError(std::string(who) + ": eigenvalue " + std::to_string(eig.values.back()) +
                                " below ridge floor " + std::to_string(floor),
                            eig.values.back());
  Matrix b(n, n);
  Vector vk(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::pow(eig.values[k], exponent);
    for (std::size_t i = 0; i < n; ++i) vk[i] = eig.vectors(i, k);
    for (std::size_t i = 0; i < n; ++i) ker::axpy(w * vk[i], vk.data(), b.row(i), n);
  }
  return b;
}

}  // namespace

Matrix inv_sqrt(const SpdMatrix& a) { return spd_power(a, -0.5, "inv_sqrt"); }

Matrix spd_sqrt(const SpdMatrix& a) { return spd_power(a, 0.5, "spd_sqrt"); }

Matrix gram_schmidt(const Matrix& m) {
  if (m.cols() > m.rows()) throw ShapeError("gram_schmidt: more columns than rows");
  Matrix qt = transpose(m);  // rows of qt are the columns being orthonormalized
  const std::size_t k = qt.rows(), n = qt.cols();
  for (std::size_t j = 0; j < k; ++j) {
    double* vj = qt.row(j);
    const double original = std::sqrt(ker::dot(vj, vj, n));
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        const double c = ker::dot(qt.row(i), vj, n);
        ker::axpy(-c, qt.row(i), vj, n);
      }
    }
    const double nn = std::sqrt(ker::dot(vj, vj, n));
    if (!(nn > 1e-12 * (original > 0 ? original : 1.0)) || nn == 0.0)
      throw DegenerateInputError("gram_schmidt: column " + std::to_string(j) +
                                 " linearly dependent on predecessors");
    ker::scal(1.0 / nn, vj, n);
  }
  return transpose(qt);
}

Matrix cholesky(const SpdMatrix& a) {
  const std::size_t n = a.dim();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j) - ker::dot(l.row(j), l.row(j), j);
    if (!(diag > 0.0))
      throw NearSingularError("cholesky: non-positive pivot at index " + std::to_string(j), diag);
    diag = std::sqrt(diag);
    l(j, j) = diag;
    const double inv = 1.0 / diag;
    for (std::size_t i = j + 1; i < n; ++i)
      l(i, j) = (a(i, j) - ker::dot(l.row(i), l.row(j), j)) * inv;
  }
  return l;
}

Vector cholesky_solve(const Matrix& l, const Vector& b) {
  const std::size_t n = l.rows();
  if (b.size() != n) throw ShapeError("cholesky_solve: length mismatch");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = (b[i] - ker::dot(l.row(i), y.data(), i)) / l(i, i);
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= l(j, ii) * x[j];
    x[ii] = acc / l(ii, ii);
  }
  return x;
}

Vector cg_solve(const LinOp& apply, const Vector& b, double tol, std::size_t max_iters) {
  const std::size_t n = b.size();
  if (max_iters == 0) max_iters = 10 * n;
  for (double v : b)
    if (!std::isfinite(v)) throw ArgumentError("cg_solve: non-finite right-hand side");

  Vector x(n, 0.0);
  const double bnorm = norm(b);
  if (bnorm == 0.0) return x;

  Vector r = b;  // r = b - A*0
  Vector p = r;
  Vector ap(n);
  double rr = dot(r, r);
  const double stop = tol * bnorm;
  if (std::sqrt(rr) <= stop) return x;

  for (std::size_t it = 0; it < max_iters; ++it) {
    apply(p, ap);
    const double alpha = rr / dot(p, ap);
    axpy_into(alpha, p, x);
    axpy_into(-alpha, ap, r);
    const double rr_next = dot(r, r);
    if (std::sqrt(rr_next) <= stop) return x;
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw ConvergenceError("cg_solve: no convergence within iteration budget", std::sqrt(rr),
                         max_iters);
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (m.max_abs() == 0.0) return 0.0;
  return svd(m, false).sigma.front();
}

}  // namespace dcca
