#pragma once

#include <cstdint>
#include <string>

#include "dcca/matrix.hpp"

namespace dcca {

/// Ground-truth two-view Gaussian model with planted canonical structure.
/// The leading canonical correlations are 0.1 + 3*delta, 0.1 + 2*delta,
/// 0.1 + delta, then 0.1 down to rank r, then exact zeros.
struct PopulationModel {
  std::size_t dx = 0, dy = 0;
  std::size_t r = 0;  // number of correlated directions, <= min(dx, dy)
  double delta = 0.0;
  SpdMatrix sigma_x, sigma_y;
  Matrix sigma_xy;
  Matrix u_star, v_star;  // dx x r and dy x r, Sigma-orthonormal columns
  Vector rho_star;        // length max(dx, dy), descending, zero padded

  Matrix joint_covariance() const;
};

struct Dataset {
  Matrix x, y;
  std::size_t n() const { return x.rows(); }
};

/// Builds the random-covariance model: Sigma_x = I + (Z + Z^T)/||2(Z + Z^T)||,
/// cross block Sigma_x^{1/2} Phi D Psi^T Sigma_y^{1/2} with Phi, Psi drawn
/// Gaussian and Gram-Schmidt orthonormalized.
/// delta must lie in (0, 0.3] so every correlation stays within [0, 1].
/// r = 0 means min(dx, dy).
PopulationModel gen_population(std::size_t dx, std::size_t dy, double delta, std::uint64_t seed,
                               std::size_t r = 0);

/// n i.i.d. rows of N(0, joint covariance), drawn through the Cholesky factor.
/// Bit-reproducible for a fixed (model, seed).
Dataset sample(const PopulationModel& model, std::size_t n, std::uint64_t seed);

/// Binary fixture format: magic, dims, delta, then row-major little-endian
/// 64-bit floats for each block.
void dump_model(const PopulationModel& model, const std::string& path);
PopulationModel load_model(const std::string& path);

}  // namespace dcca
