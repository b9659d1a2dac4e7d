#include "dcca/solver.hpp"

#include <cmath>
#include <string>

#include "dcca/errors.hpp"
#include "dcca/kernels.hpp"
#include "dcca/linalg.hpp"

namespace dcca {

namespace ker = kernels;

namespace {

void split(const Vector& z, std::size_t dx, Vector& u, Vector& v) {
  u.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(dx));
  v.assign(z.begin() + static_cast<std::ptrdiff_t>(dx), z.end());
}

/// a += alpha * x y^T
void rank_one_update(Matrix& a, double alpha, const Vector& x, const Vector& y) {
  for (std::size_t i = 0; i < a.rows(); ++i) ker::axpy(alpha * x[i], y.data(), a.row(i), a.cols());
}

Matrix assemble_h1(const MachineShard& m1, double rho_bar, std::size_t level) {
  const Matrix& sxx = m1.moments.sxx.mat();
  const Matrix& syy = m1.moments.syy.mat();
  const Matrix& c = m1.deflated_xy.at(level);
  const std::size_t dx = sxx.rows(), dy = syy.rows();
  Matrix h(dx + dy, dx + dy);
  for (std::size_t i = 0; i < dx; ++i) {
    for (std::size_t j = 0; j < dx; ++j) h(i, j) = rho_bar * sxx(i, j);
    for (std::size_t j = 0; j < dy; ++j) h(i, dx + j) = -c(i, j);
  }
  for (std::size_t i = 0; i < dy; ++i) {
    for (std::size_t j = 0; j < dx; ++j) h(dx + i, j) = -c(j, i);
    for (std::size_t j = 0; j < dy; ++j) h(dx + i, dx + j) = rho_bar * syy(i, j);
  }
  return h;
}

LinOp h1_operator(const MachineShard& m1, double rho_bar, std::size_t level) {
  const Matrix& sxx = m1.moments.sxx.mat();
  const Matrix& syy = m1.moments.syy.mat();
  const Matrix& c = m1.deflated_xy.at(level);
  const std::size_t dx = sxx.rows();
  return [&sxx, &syy, &c, rho_bar, dx](const Vector& z, Vector& out) {
    Vector zu, zv;
    split(z, dx, zu, zv);
    Vector top = matvec(sxx, zu);
    scale(top, rho_bar);
    axpy_into(-1.0, matvec(c, zv), top);
    Vector bottom = matvec(syy, zv);
    scale(bottom, rho_bar);
    axpy_into(-1.0, matvec_t(c, zu), bottom);
    out = concat(top, bottom);
  };
}

}  // namespace

void SolverConfig::validate() const {
  if (l < 1) throw ArgumentError("SolverConfig: L must be at least 1");
  if (t < 1 || t_prime < 1) throw ArgumentError("SolverConfig: T and T' must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("SolverConfig: delta must lie in (0,1)");
  if (omega_override) {
    if (!(*omega_override > 0.0)) throw ArgumentError("SolverConfig: omega override must be positive");
  } else if (!(c0 > 0.0)) {
    throw ArgumentError("SolverConfig: c0 must be positive");
  }
  if (!(cg_tol > 0.0)) throw ArgumentError("SolverConfig: cg_tol must be positive");
}

double estimate_omega(std::size_t d, std::size_t n, double c0) {
  if (d < 2) throw ArgumentError("estimate_omega: dimension must be at least 2");
  if (n < 1) throw ArgumentError("estimate_omega: shard size must be positive");
  if (!(c0 > 0.0)) throw ArgumentError("estimate_omega: c0 must be positive");
  const double dd = static_cast<double>(d);
  const double ld = std::log(dd);
  return c0 * std::sqrt(dd * ld * ld / static_cast<double>(n));
}

ShiftState init_top(Cluster& cluster, std::size_t level, double omega) {
  if (omega < 0.0) throw ArgumentError("init_top: omega must be nonnegative");
  MachineShard& first = cluster.machine(0);
  first.prepare_whitening();

  const Matrix t1 = first.whitened_cross(level);
  ShiftState state;
  state.level = level;
  if (t1.max_abs() == 0.0) {
    // Degenerate cross-covariance: any unit pair; the captured correlation is
    // flagged downstream.
    state.u = Vector(cluster.dx(), 0.0);
    state.v = Vector(cluster.dy(), 0.0);
    Vector phi(cluster.dx(), 0.0), psi(cluster.dy(), 0.0);
    phi[0] = 1.0;
    psi[0] = 1.0;
    state.u = matvec(first.inv_sqrt_x(), phi);
    state.v = matvec(first.inv_sqrt_y(), psi);
    state.rho_bar = 1.5 * omega;
  } else {
    const Svd top = truncated_svd(t1, 1);
    state.u = matvec(first.inv_sqrt_x(), top.u.col(0));
    state.v = matvec(first.inv_sqrt_y(), top.v.col(0));
    state.rho_bar = top.sigma[0] + 1.5 * omega;
  }

  const double nx = bilinear(state.u, first.moments.sxx.mat(), state.u);
  const double ny = bilinear(state.v, first.moments.syy.mat(), state.v);
  const double s = std::sqrt(2.0 / (nx + ny));
  scale(state.u, s);
  scale(state.v, s);
  return state;
}

Vector local_gradient(const MachineShard& machine, double rho_bar, std::size_t level,
                      const Vector& u_iter, const Vector& v_iter, const Vector& u_anchor,
                      const Vector& v_anchor) {
  const Matrix& sxx = machine.moments.sxx.mat();
  const Matrix& syy = machine.moments.syy.mat();
  const Matrix& c = machine.deflated_xy.at(level);
  if (u_iter.size() != sxx.rows() || v_iter.size() != syy.rows() ||
      u_anchor.size() != sxx.rows() || v_anchor.size() != syy.rows())
    throw ShapeError("local_gradient: vector length mismatch");

  // Sxx (rho_bar u_j - u_t) - C v_j  and the mirrored bottom half.
  Vector ux = u_iter;
  scale(ux, rho_bar);
  axpy_into(-1.0, u_anchor, ux);
  Vector g_top = matvec(sxx, ux);
  axpy_into(-1.0, matvec(c, v_iter), g_top);

  Vector vy = v_iter;
  scale(vy, rho_bar);
  axpy_into(-1.0, v_anchor, vy);
  Vector g_bottom = matvec(syy, vy);
  axpy_into(-1.0, matvec_t(c, u_iter), g_bottom);

  return concat(g_top, g_bottom);
}

void inner_round(Cluster& cluster, ShiftState& state, const Vector& u_anchor,
                 const Vector& v_anchor, const SolverConfig& config) {
  const std::size_t k = cluster.machine_count();
  const std::size_t d = cluster.dim();

  std::vector<Vector> grads(k);
  for_each_machine(cluster, [&](std::size_t m) {
    grads[m] = local_gradient(cluster.machine(m), state.rho_bar, state.level, state.u, state.v,
                              u_anchor, v_anchor);
  });
  const Vector g_bar = reduce_average(cluster, "inner-gather", grads);

  Vector step;
  if (!state.h1_factor.empty()) {
    step = cholesky_solve(state.h1_factor, g_bar);
  } else {
    const LinOp h1 = h1_operator(cluster.machine(0), state.rho_bar, state.level);
    try {
      step = cg_solve(h1, g_bar, config.cg_tol,
                      config.cg_max_iters == 0 ? 10 * d : config.cg_max_iters);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("inner_round: preconditioner solve stalled (" +
                                 std::string(e.what()) + ")",
                             e.residual, e.iters);
    }
  }

  for (std::size_t i = 0; i < cluster.dx(); ++i) state.u[i] -= step[i];
  for (std::size_t i = 0; i < cluster.dy(); ++i) state.v[i] -= step[cluster.dx() + i];
  state.products_valid = false;
  cluster.ledger().to_workers_multicast("inner-iterate", d);
}

void outer_round(Cluster& cluster, ShiftState& state, const SolverConfig& config) {
  const std::size_t k = cluster.machine_count();
  const Vector u_anchor = state.u;
  const Vector v_anchor = state.v;

  for (std::size_t j = 0; j < config.t_prime; ++j)
    inner_round(cluster, state, u_anchor, v_anchor, config);

  // Renormalize with global metric inner products.
  std::vector<Vector> locals(k);
  for_each_machine(cluster, [&](std::size_t m) {
    const CovarianceTriple& mom = cluster.machine(m).moments;
    locals[m] = concat(matvec(mom.sxx.mat(), state.u), matvec(mom.syy.mat(), state.v));
  });
  const Vector products = reduce_average(cluster, "norm-gather", locals);
  Vector gxu, gyv;
  split(products, cluster.dx(), gxu, gyv);

  double nx = dot(state.u, gxu);
  double ny = dot(state.v, gyv);
  const double metric_sum = nx + ny;
  if (!(metric_sum > 1e-14))
    throw DegenerateInputError("outer_round: iterate collapsed to the zero vector");

  const double s = std::sqrt(2.0 / metric_sum);
  scale(state.u, s);
  scale(state.v, s);
  scale(gxu, s);
  scale(gyv, s);
  nx *= s * s;
  ny *= s * s;

  state.global_xu = std::move(gxu);
  state.global_yv = std::move(gyv);
  state.norm_x_sq = nx;
  state.norm_y_sq = ny;
  state.products_valid = true;
  state.outer_done += 1;
  cluster.ledger().to_workers_multicast("anchor", cluster.dim());

  if (state.log_trajectory) {
    if (!(nx > 1e-14 && ny > 1e-14))
      throw DegenerateInputError("outer_round: one-sided collapse of the iterate");
    TrajectoryPoint p;
    p.outer = state.outer_done;
    p.u = state.u;
    p.v = state.v;
    scale(p.u, 1.0 / std::sqrt(nx));
    scale(p.v, 1.0 / std::sqrt(ny));
    state.trajectory.push_back(std::move(p));
  }
}

TopPairResult solve_top_pair(Cluster& cluster, const SolverConfig& config, std::size_t level) {
  config.validate();
  const std::size_t d = cluster.dim();
  const std::size_t n1 = cluster.machine(0).moments.n;
  const double omega =
      config.omega_override ? *config.omega_override : estimate_omega(d, n1, config.c0);

  cluster.ledger().to_workers_multicast("shift", 1);
  ShiftState state = init_top(cluster, level, omega);
  state.log_trajectory = config.log_trajectory;
  const double sigma_max_local = state.rho_bar - 1.5 * omega;

  // The shift construction makes H_1 positive definite; assert it once per
  // level with a Cholesky attempt (the factor is kept for the exact path).
  Matrix h1 = assemble_h1(cluster.machine(0), state.rho_bar, level);
  Matrix factor;
  try {
    factor = cholesky(SpdMatrix(std::move(h1)));
  } catch (const NearSingularError& e) {
    throw NearSingularError("solve_top_pair: machine-1 Hessian not positive definite at level " +
                                std::to_string(level) + " (" + e.what() + ")",
                            e.offending_eigenvalue);
  }
  if (config.exact_inner) {
    if (d > 64) throw ArgumentError("solve_top_pair: exact_inner is a test path limited to d <= 64");
    state.h1_factor = std::move(factor);
  }

  cluster.ledger().to_workers_multicast("anchor", d);
  for (std::size_t t = 0; t < config.t; ++t) outer_round(cluster, state, config);

  if (!(state.norm_x_sq > 1e-14 && state.norm_y_sq > 1e-14))
    throw DegenerateInputError("solve_top_pair: one-sided collapse after final round");

  TopPairResult out;
  out.u = state.u;
  out.v = state.v;
  scale(out.u, 1.0 / std::sqrt(state.norm_x_sq));
  scale(out.v, 1.0 / std::sqrt(state.norm_y_sq));
  out.trajectory = std::move(state.trajectory);
  out.rho_bar = state.rho_bar;
  out.omega = omega;
  out.sigma_max_local = sigma_max_local;
  return out;
}

Vector DeflationState::project_x(Vector w) const {
  for (std::size_t j = 0; j < size(); ++j) {
    const double coef = ker::dot(global_xu.col(j).data(), w.data(), w.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= u_done(i, j) * coef;
  }
  return w;
}

Vector DeflationState::project_y(Vector w) const {
  for (std::size_t j = 0; j < size(); ++j) {
    const double coef = ker::dot(global_yv.col(j).data(), w.data(), w.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= v_done(i, j) * coef;
  }
  return w;
}

namespace {

Matrix append_column(const Matrix& m, const Vector& col) {
  Matrix out(col.size(), m.empty() ? 1 : m.cols() + 1);
  for (std::size_t i = 0; i < col.size(); ++i) {
    for (std::size_t j = 0; j + 1 < out.cols(); ++j) out(i, j) = m(i, j);
    out(i, out.cols() - 1) = col[i];
  }
  return out;
}

}  // namespace

void deflate(Cluster& cluster, Vector& u, Vector& v, DeflationState& state) {
  const std::size_t k = cluster.machine_count();
  const std::size_t d = cluster.dim();

  Vector pu = state.project_x(u);
  Vector pv = state.project_y(v);
  cluster.ledger().to_workers_multicast("deflate-dir", d);

  std::vector<Vector> locals(k);
  for_each_machine(cluster, [&](std::size_t m) {
    const CovarianceTriple& mom = cluster.machine(m).moments;
    locals[m] = concat(matvec(mom.sxx.mat(), pu), matvec(mom.syy.mat(), pv));
  });
  const Vector products = reduce_average(cluster, "deflate-gather", locals);
  Vector gxu, gyv;
  split(products, cluster.dx(), gxu, gyv);

  const double nx = dot(pu, gxu);
  const double ny = dot(pv, gyv);
  if (!(std::sqrt(std::max(nx, 0.0)) > 1e-12) || !(std::sqrt(std::max(ny, 0.0)) > 1e-12))
    throw DegenerateInputError(
        "deflate: projected direction collapsed; level already spanned by the found basis");

  const double sx = 1.0 / std::sqrt(nx);
  const double sy = 1.0 / std::sqrt(ny);
  scale(pu, sx);
  scale(pv, sy);
  scale(gxu, sx);
  scale(gyv, sy);

  // Norm scalars plus the global products let every machine rebuild the
  // normalized pair and apply the metric projector locally.
  cluster.ledger().to_workers_multicast("deflate-products", d + 2);

  for_each_machine(cluster, [&](std::size_t m) {
    MachineShard& shard_m = cluster.machine(m);
    Matrix next = shard_m.deflated_xy.back();
    // (I - gxu u^T) A (I - v gyv^T)
    rank_one_update(next, -1.0, gxu, matvec_t(shard_m.deflated_xy.back(), pu));
    rank_one_update(next, -1.0, matvec(next, pv), gyv);
    shard_m.deflated_xy.push_back(std::move(next));
  });

  state.u_done = append_column(state.u_done, pu);
  state.v_done = append_column(state.v_done, pv);
  state.global_xu = append_column(state.global_xu, gxu);
  state.global_yv = append_column(state.global_yv, gyv);

  u = std::move(pu);
  v = std::move(pv);
}

TopLResult solve_top_L(Cluster& cluster, const SolverConfig& config) {
  config.validate();
  if (config.l > std::min(cluster.dx(), cluster.dy()))
    throw ArgumentError("solve_top_L: L exceeds min(dx, dy)");

  const std::uint64_t before = cluster.ledger().total();
  const std::size_t k = cluster.machine_count();

  TopLResult out;
  out.basis.u = Matrix(cluster.dx(), config.l);
  out.basis.v = Matrix(cluster.dy(), config.l);
  out.basis.rho.resize(config.l);
  out.basis.method = "dist";

  DeflationState defl;
  for (std::size_t level = 0; level < config.l; ++level) {
    TopPairResult pair = solve_top_pair(cluster, config, level);
    Vector u = std::move(pair.u);
    Vector v = std::move(pair.v);
    deflate(cluster, u, v, defl);

    // rho_l as a distributed bilinear form against the undeflated cross block.
    std::vector<Vector> locals(k);
    for_each_machine(cluster, [&](std::size_t m) {
      locals[m] = Vector{dot(u, matvec(cluster.machine(m).moments.sxy, v))};
    });
    const double rho = reduce_average(cluster, "rho-gather", locals)[0];

    out.basis.u.set_col(level, u);
    out.basis.v.set_col(level, v);
    out.basis.rho[level] = rho;
    out.negligible_correlation.push_back(std::fabs(rho) <= 1e-10);
    out.trajectories.push_back(std::move(pair.trajectory));
  }

  out.ledger_scalars = cluster.ledger().total() - before;
  return out;
}

std::uint64_t expected_top_pair_scalars(std::size_t t, std::size_t t_prime, std::size_t k,
                                        std::size_t d) {
  return 1 + d + static_cast<std::uint64_t>(t) * (t_prime + 1) * (k + 1) * d;
}

std::uint64_t expected_top_l_scalars(std::size_t t, std::size_t t_prime, std::size_t k,
                                     std::size_t d, std::size_t l) {
  const std::uint64_t per_level =
      expected_top_pair_scalars(t, t_prime, k, d) + (k + 2) * d + 2 + k;
  return l * per_level;
}

}  // namespace dcca
