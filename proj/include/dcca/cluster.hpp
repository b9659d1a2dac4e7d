#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dcca/matrix.hpp"
#include "dcca/synthetic.hpp"

namespace dcca {

// ---------------------------------------------------------------------------
// Message accounting
//
// The ledger counts logical scalars moved over the star, one record per
// message. Worker-to-center traffic is always per link (K records for a full
// gather). Center-to-worker traffic comes in two flavors:
//   * broadcast()  - accounted per link, K records of m scalars each;
//   * multicast    - one shared message of m scalars, used by the solver's
//     iterate distribution (to_workers_multicast).
// ---------------------------------------------------------------------------

enum class Direction { ToCenter, ToWorkers };

struct LedgerRecord {
  std::string round;
  Direction direction;
  std::uint32_t machine;  // 1-based worker id; 0 = center multicast
  std::uint64_t scalars;
};

class MessageLedger {
 public:
  void to_center(std::string_view round, std::uint32_t machine, std::uint64_t scalars);
  void to_workers_link(std::string_view round, std::uint32_t machine, std::uint64_t scalars);
  void to_workers_multicast(std::string_view round, std::uint64_t scalars);

  std::uint64_t total() const { return total_; }
  std::uint64_t total(Direction d) const;
  std::uint64_t total_for_round(std::string_view round) const;
  std::size_t record_count() const { return records_.size(); }
  const std::vector<LedgerRecord>& records() const { return records_; }

  /// CSV with header round,direction,machine,scalars.
  void export_csv(std::ostream& os) const;

 private:
  std::vector<LedgerRecord> records_;
  std::uint64_t total_ = 0;
};

// ---------------------------------------------------------------------------
// Shards and moments
// ---------------------------------------------------------------------------

struct CovarianceTriple {
  SpdMatrix sxx, syy;
  Matrix sxy;
  std::size_t n = 0;
};

/// (1/n) X^T X style second moments of one data block; `mean_*` are
/// subtracted first when non-empty, `ridge` is added to both diagonals.
CovarianceTriple compute_moments(const Matrix& x, const Matrix& y, const Vector& mean_x,
                                 const Vector& mean_y, double ridge);

enum class Centering {
  None,       // data assumed zero-mean (synthetic draws)
  GlobalMean  // one ledger-accounted averaging round of the mean vector
};

struct MachineShard {
  std::size_t id = 0;  // 1-based
  Matrix x, y;         // raw rows (empty when the cluster drops data)
  CovarianceTriple moments;
  std::vector<Matrix> deflated_xy;  // level l cross-covariance; [0] == moments.sxy

  // Whitening factors of the local auto-covariances, built on first use.
  void prepare_whitening();
  bool whitening_ready() const { return whitening_ready_; }
  const Matrix& inv_sqrt_x() const { return inv_sqrt_x_; }
  const Matrix& inv_sqrt_y() const { return inv_sqrt_y_; }

  /// Local whitened cross-covariance at a deflation level.
  Matrix whitened_cross(std::size_t level) const;

 private:
  Matrix inv_sqrt_x_, inv_sqrt_y_;
  bool whitening_ready_ = false;
};

struct ClusterOptions {
  Centering centering = Centering::None;
  double ridge = 0.0;
  unsigned threads = 1;
  bool retain_data = true;  // false drops raw rows once moments exist
};

class Cluster {
 public:
  std::size_t machine_count() const { return machines_.size(); }
  std::size_t dx() const { return dx_; }
  std::size_t dy() const { return dy_; }
  std::size_t dim() const { return dx_ + dy_; }
  std::size_t total_rows() const { return total_rows_; }

  MachineShard& machine(std::size_t k) { return machines_[k]; }          // 0-based
  const MachineShard& machine(std::size_t k) const { return machines_[k]; }
  double weight(std::size_t k) const;  // n_k / N

  /// Equal-weight (shard-weighted) average of the local moments. Available to
  /// the evaluator and the pooled baseline; the solver reaches global
  /// quantities only through ledger-accounted reductions.
  const CovarianceTriple& global_moments() const { return global_; }

  MessageLedger& ledger() { return ledger_; }
  const MessageLedger& ledger() const { return ledger_; }
  unsigned threads() const { return threads_; }

  friend Cluster shard(const Dataset&, std::size_t, const ClusterOptions&);

 private:
  std::vector<MachineShard> machines_;
  CovarianceTriple global_;
  MessageLedger ledger_;
  std::size_t dx_ = 0, dy_ = 0, total_rows_ = 0;
  unsigned threads_ = 1;
};

/// Contiguous split of the dataset over K machines; when K does not divide N
/// the first N mod K machines take one extra row and every average is
/// weighted by n_k / N.
Cluster shard(const Dataset& data, std::size_t k, const ClusterOptions& options = {});

/// Weighted average of per-machine vectors, reduced in machine-id order.
/// Ledger: K to-center records of the vector length.
Vector reduce_average(Cluster& cluster, std::string_view round,
                      const std::vector<Vector>& per_machine);

/// Per-link star broadcast: K to-workers records of m scalars.
void broadcast(Cluster& cluster, std::string_view round, std::size_t m);

/// Global auto-covariance products assembled from accounted local products:
/// one broadcast of the vector plus K gathers of the result length.
Vector distributed_matvec_x(Cluster& cluster, const Vector& u,
                            std::string_view round = "matvec-x");
Vector distributed_matvec_y(Cluster& cluster, const Vector& v,
                            std::string_view round = "matvec-y");

/// Runs fn(k) for every machine on the cluster's worker budget. Results must
/// land in caller-owned slots indexed by k; reductions stay with the caller,
/// so scheduling order never affects numerics. The first exception (by
/// machine order) is rethrown after all workers join.
void for_each_machine(Cluster& cluster, const std::function<void(std::size_t)>& fn);

}  // namespace dcca
