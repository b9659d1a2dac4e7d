#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dcca/baselines.hpp"
#include "dcca/cluster.hpp"
#include "dcca/matrix.hpp"

namespace dcca {

// Distributed estimation of canonical direction pairs on a star network.
//
// The outer loop is shift-and-invert preconditioned power iteration: with a
// shift rho_bar slightly above the top correlation, each round maps the
// iterate through H^{-1} B, where H is the shifted Hessian
//   H = [[rho_bar Sxx, -Sxy], [-Sxy^T, rho_bar Syy]]
// and B = blockdiag(Sxx, Syy). The inner loop approximates that solve with
// Newton steps preconditioned by machine 1's local Hessian while gradients
// are averaged over all machines; only d-vectors ever travel.
//
// Ledger closed form for one solve_top_pair(T, T') run on K machines, d =
// dx + dy (asserted exactly by the tests):
//
//   1                        shift value to the workers
//   + d                      initial anchor multicast
//   + T * T' * (K*d + d)     per inner round: gradient gather + iterate multicast
//   + T * (K*d + d)          per outer round: normalization gather + new anchor
//
// i.e. expected_top_pair_scalars() = 1 + d + T*(T' + 1)*(K + 1)*d. The
// initializer itself is communication-free (machine 1 only).

struct SolverConfig {
  std::size_t l = 1;         // number of direction pairs
  std::size_t t = 50;        // outer rounds
  std::size_t t_prime = 10;  // inner rounds per outer round
  double c0 = 0.5;           // shift margin constant; omega = c0 sqrt(d log^2 d / n)
  std::optional<double> omega_override;
  double delta = 0.15;  // relative-gap parameter used for reporting/metrics
  double cg_tol = 1e-10;
  std::size_t cg_max_iters = 0;  // 0 -> 10 * d
  std::uint64_t seed = 0;        // reserved; the deterministic path ignores it
  bool exact_inner = false;      // dense machine-1 factorization, test oracles only
  bool log_trajectory = false;

  void validate() const;
};

struct TrajectoryPoint {
  std::size_t outer = 0;  // 1-based outer round index
  Vector u, v;            // separately normalized in the global metrics
};

struct ShiftState {
  double rho_bar = 0.0;
  Vector u, v;
  std::size_t level = 0;
  std::size_t outer_done = 0;
  std::vector<TrajectoryPoint> trajectory;
  bool log_trajectory = false;

  // Center-side cache, valid after each outer normalization.
  Vector global_xu, global_yv;  // Sxx u and Syy v under the global moments
  double norm_x_sq = 0.0, norm_y_sq = 0.0;
  bool products_valid = false;

  // Dense Cholesky factor of machine 1's Hessian (exact-inner test path).
  Matrix h1_factor;
};

/// omega = c0 * sqrt(d * (ln d)^2 / n).
double estimate_omega(std::size_t d, std::size_t n, double c0);

/// Machine-1 initializer at a deflation level: top singular pair of the local
/// whitened (deflated) cross-covariance, un-whitened, normalized to
/// metric-sum 2 in machine 1's own metric. rho_bar = sigma_max + 1.5 omega.
ShiftState init_top(Cluster& cluster, std::size_t level, double omega);

/// g_k = H_k [u_j; v_j] - blockdiag(Sxx_k, Syy_k) [u_t; v_t], with the level's
/// deflated cross block inside H_k. Matrix-vector products only.
Vector local_gradient(const MachineShard& machine, double rho_bar, std::size_t level,
                      const Vector& u_iter, const Vector& v_iter, const Vector& u_anchor,
                      const Vector& v_anchor);

/// One approximate Newton step: gather gradients, solve H_1 x = g-bar
/// (matrix-free CG against machine-1 moments), subtract, share the iterate.
void inner_round(Cluster& cluster, ShiftState& state, const Vector& u_anchor,
                 const Vector& v_anchor, const SolverConfig& config);

/// T' inner rounds from the current anchor, then renormalization to
/// <u,u>_Sxx + <v,v>_Syy = 2 with distributed inner products.
void outer_round(Cluster& cluster, ShiftState& state, const SolverConfig& config);

struct TopPairResult {
  Vector u, v;  // <u,u>_Sxx = <v,v>_Syy = 1 under the global moments
  std::vector<TrajectoryPoint> trajectory;
  double rho_bar = 0.0;
  double omega = 0.0;
  double sigma_max_local = 0.0;  // machine-1 top singular value at this level
};

TopPairResult solve_top_pair(Cluster& cluster, const SolverConfig& config, std::size_t level = 0);

/// Already-found directions plus cached global products, defining the
/// projector onto their metric-orthogonal complement.
struct DeflationState {
  Matrix u_done, v_done;        // dx x l, dy x l
  Matrix global_xu, global_yv;  // Sxx U and Syy V columns

  std::size_t size() const { return u_done.cols(); }
  Vector project_x(Vector w) const;  // w - U (global_xu^T w)
  Vector project_y(Vector w) const;
};

/// Projects (u, v) against the found directions, renormalizes with distributed
/// inner products, appends to the state, and has every machine fold the new
/// pair into its deflated cross-covariance using only the shared vectors.
/// Throws DegenerateInputError when the projected direction collapses.
void deflate(Cluster& cluster, Vector& u, Vector& v, DeflationState& state);

struct TopLResult {
  CanonicalBasis basis;
  std::vector<std::vector<TrajectoryPoint>> trajectories;  // one per level
  std::vector<bool> negligible_correlation;
  std::uint64_t ledger_scalars = 0;  // scalars this solve added to the ledger
};

/// Sequential deflation: init -> solve_top_pair -> deflate, L times; reported
/// correlations are distributed bilinear forms against the global
/// cross-covariance.
TopLResult solve_top_L(Cluster& cluster, const SolverConfig& config);

std::uint64_t expected_top_pair_scalars(std::size_t t, std::size_t t_prime, std::size_t k,
                                        std::size_t d);
std::uint64_t expected_top_l_scalars(std::size_t t, std::size_t t_prime, std::size_t k,
                                     std::size_t d, std::size_t l);

}  // namespace dcca
