#pragma once

#include <string>

#include "dcca/cluster.hpp"
#include "dcca/matrix.hpp"

namespace dcca {

/// L estimated canonical direction pairs with their correlations. Pooled and
/// distributed estimates satisfy U^T Sxx U = I in the global metric; the
/// naive divide-and-conquer estimate deliberately does not (it ignores the
/// metric, which is its known defect).
struct CanonicalBasis {
  Matrix u, v;  // dx x L, dy x L
  Vector rho;   // descending
  std::string method;
};

/// Classic whitened-SVD solution on a single moment set.
CanonicalBasis pooled_cca(const CovarianceTriple& moments, std::size_t l);

/// One-shot estimate: every machine ships its local top-L whitened singular
/// vectors; the center averages the projection matrices and eigendecomposes.
/// Reported correlations are re-estimated against the global cross-covariance
/// so that all methods live on one scale.
CanonicalBasis naive_dc(Cluster& cluster, std::size_t l);

/// naive_dc's eigenvector blocks pushed through machine 1's inverse
/// square-root whitening.
CanonicalBasis whitened_dc(Cluster& cluster, std::size_t l);

}  // namespace dcca
