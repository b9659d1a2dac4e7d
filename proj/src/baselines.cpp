#include "dcca/baselines.hpp"

#include "dcca/errors.hpp"
#include "dcca/linalg.hpp"

namespace dcca {

CanonicalBasis pooled_cca(const CovarianceTriple& moments, std::size_t l) {
  const std::size_t r = std::min(moments.sxx.dim(), moments.syy.dim());
  if (l < 1 || l > r) throw ArgumentError("pooled_cca: L out of range");

  const Matrix ix = inv_sqrt(moments.sxx);
  const Matrix iy = inv_sqrt(moments.syy);
  const Matrix t_hat = matmul(ix, matmul(moments.sxy, iy));
  Svd top = truncated_svd(t_hat, l);

  CanonicalBasis out;
  out.u = matmul(ix, top.u);
  out.v = matmul(iy, top.v);
  out.rho = std::move(top.sigma);
  out.method = "pooled";
  return out;
}

namespace {

struct DcEigenblocks {
  Matrix phi, psi;  // dx x L, dy x L in whitened coordinates
};

// Orthogonal Procrustes fit: the orthonormal basis W rotated (within its own
// span) onto the target frame. Keeps the estimated subspace intact while
// pinning down the basis representative, which would otherwise be arbitrary
// inside clustered eigenvalues (all of them equal 1 for K = 1).
Matrix align_basis(const Matrix& w, const Matrix& target) {
  const Svd s = svd(matmul_tn(w, target), false);
  return matmul(w, matmul_nt(s.u, s.v));
}

DcEigenblocks dc_eigenblocks(Cluster& cluster, std::size_t l) {
  const std::size_t k = cluster.machine_count();
  const std::size_t dx = cluster.dx(), dy = cluster.dy();
  if (l < 1 || l > std::min(dx, dy)) throw ArgumentError("divide-and-conquer: L out of range");

  std::vector<Matrix> phis(k), psis(k);
  for_each_machine(cluster, [&](std::size_t m) {
    MachineShard& shard_m = cluster.machine(m);
    shard_m.prepare_whitening();
    const Svd local = truncated_svd(shard_m.whitened_cross(0), l);
    phis[m] = local.u;
    psis[m] = local.v;
  });

  // Local singular-vector blocks travel to the center.
  Matrix tx(dx, dx), ty(dy, dy);
  for (std::size_t m = 0; m < k; ++m) {
    cluster.ledger().to_center("dc-gather", static_cast<std::uint32_t>(m + 1),
                               l * (dx + dy));
    const double w = cluster.weight(m);
    tx = tx + w * matmul_nt(phis[m], phis[m]);
    ty = ty + w * matmul_nt(psis[m], psis[m]);
  }

  const SymEig ex = sym_eig(tx);
  const SymEig ey = sym_eig(ty);
  Matrix wx(dx, l), wy(dy, l);
  for (std::size_t j = 0; j < l; ++j) {
    for (std::size_t i = 0; i < dx; ++i) wx(i, j) = ex.vectors(i, j);
    for (std::size_t i = 0; i < dy; ++i) wy(i, j) = ey.vectors(i, j);
  }

  DcEigenblocks out;
  out.phi = align_basis(wx, phis[0]);
  out.psi = align_basis(wy, psis[0]);
  return out;
}

Vector rescored_rho(const Cluster& cluster, const Matrix& u, const Matrix& v) {
  return svd(matmul_tn(u, matmul(cluster.global_moments().sxy, v)), false).sigma;
}

}  // namespace

CanonicalBasis naive_dc(Cluster& cluster, std::size_t l) {
  DcEigenblocks blocks = dc_eigenblocks(cluster, l);
  CanonicalBasis out;
  out.rho = rescored_rho(cluster, blocks.phi, blocks.psi);
  out.u = std::move(blocks.phi);
  out.v = std::move(blocks.psi);
  out.method = "naive-dc";
  return out;
}

CanonicalBasis whitened_dc(Cluster& cluster, std::size_t l) {
  DcEigenblocks blocks = dc_eigenblocks(cluster, l);

  // Whitening happens on machine 1: the block ships there and comes back.
  const std::size_t d = cluster.dx() + cluster.dy();
  cluster.ledger().to_workers_link("dc-whiten", 1, l * d);
  cluster.ledger().to_center("dc-whiten", 1, l * d);
  MachineShard& first = cluster.machine(0);
  first.prepare_whitening();

  CanonicalBasis out;
  out.u = matmul(first.inv_sqrt_x(), blocks.phi);
  out.v = matmul(first.inv_sqrt_y(), blocks.psi);
  out.rho = rescored_rho(cluster, out.u, out.v);
  out.method = "whitened-dc";
  return out;
}

}  // namespace dcca
