#include "dcca/cluster.hpp"

#include <atomic>
#include <exception>
#include <ostream>
#include <thread>

#include "dcca/errors.hpp"
#include "dcca/kernels.hpp"
#include "dcca/linalg.hpp"

namespace dcca {

namespace ker = kernels;

// ---------------------------------------------------------------------------
// MessageLedger
// ---------------------------------------------------------------------------

void MessageLedger::to_center(std::string_view round, std::uint32_t machine,
                              std::uint64_t scalars) {
  records_.push_back({std::string(round), Direction::ToCenter, machine, scalars});
  total_ += scalars;
}

void MessageLedger::to_workers_link(std::string_view round, std::uint32_t machine,
                                    std::uint64_t scalars) {
  records_.push_back({std::string(round), Direction::ToWorkers, machine, scalars});
  total_ += scalars;
}

void MessageLedger::to_workers_multicast(std::string_view round, std::uint64_t scalars) {
  records_.push_back({std::string(round), Direction::ToWorkers, 0, scalars});
  total_ += scalars;
}

std::uint64_t MessageLedger::total(Direction d) const {
  std::uint64_t t = 0;
  for (const auto& r : records_)
    if (r.direction == d) t += r.scalars;
  return t;
}

std::uint64_t MessageLedger::total_for_round(std::string_view round) const {
  std::uint64_t t = 0;
  for (const auto& r : records_)
    if (r.round == round) t += r.scalars;
  return t;
}

void MessageLedger::export_csv(std::ostream& os) const {
  os << "round,direction,machine,scalars\n";
  for (const auto& r : records_) {
    os << r.round << ',' << (r.direction == Direction::ToCenter ? "to-center" : "to-workers")
       << ',' << r.machine << ',' << r.scalars << '\n';
  }
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

namespace {

Matrix centered_copy(const Matrix& m, const Vector& mean) {
  Matrix c = m;
  if (!mean.empty()) {
    if (mean.size() != m.cols()) throw ShapeError("compute_moments: mean length mismatch");
    for (std::size_t i = 0; i < c.rows(); ++i) ker::axpy(-1.0, mean.data(), c.row(i), c.cols());
  }
  return c;
}

}  // namespace

CovarianceTriple compute_moments(const Matrix& x, const Matrix& y, const Vector& mean_x,
                                 const Vector& mean_y, double ridge) {
  if (x.rows() != y.rows()) throw ShapeError("compute_moments: row counts differ");
  if (x.rows() == 0) throw ArgumentError("compute_moments: empty block");
  const double inv_n = 1.0 / static_cast<double>(x.rows());

  const Matrix xc = centered_copy(x, mean_x);
  const Matrix yc = centered_copy(y, mean_y);

  Matrix sxx = inv_n * matmul_tn(xc, xc);
  Matrix syy = inv_n * matmul_tn(yc, yc);
  if (ridge != 0.0) {
    for (std::size_t i = 0; i < sxx.rows(); ++i) sxx(i, i) += ridge;
    for (std::size_t i = 0; i < syy.rows(); ++i) syy(i, i) += ridge;
  }

  CovarianceTriple out;
  out.sxx = SpdMatrix(std::move(sxx));
  out.syy = SpdMatrix(std::move(syy));
  out.sxy = inv_n * matmul_tn(xc, yc);
  out.n = x.rows();
  return out;
}

// ---------------------------------------------------------------------------
// MachineShard
// ---------------------------------------------------------------------------

void MachineShard::prepare_whitening() {
  if (whitening_ready_) return;
  try {
    inv_sqrt_x_ = inv_sqrt(moments.sxx);
    inv_sqrt_y_ = inv_sqrt(moments.syy);
  } catch (const NearSingularError& e) {
    throw NearSingularError(
        "machine " + std::to_string(id) + ": local auto-covariance near-singular (" + e.what() +
            ")",
        e.offending_eigenvalue);
  }
  whitening_ready_ = true;
}

Matrix MachineShard::whitened_cross(std::size_t level) const {
  if (!whitening_ready_) throw Error("whitened_cross: call prepare_whitening first");
  if (level >= deflated_xy.size()) throw ArgumentError("whitened_cross: level not deflated yet");
  return matmul(inv_sqrt_x_, matmul(deflated_xy[level], inv_sqrt_y_));
}

// ---------------------------------------------------------------------------
// Cluster construction
// ---------------------------------------------------------------------------

double Cluster::weight(std::size_t k) const {
  return static_cast<double>(machines_[k].moments.n) / static_cast<double>(total_rows_);
}

namespace {

Matrix copy_rows(const Matrix& src, std::size_t begin, std::size_t count) {
  Matrix out(count, src.cols());
  for (std::size_t i = 0; i < count; ++i)
    std::copy(src.row(begin + i), src.row(begin + i) + src.cols(), out.row(i));
  return out;
}

Vector column_mean(const Matrix& m) {
  Vector mean(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) ker::axpy(1.0, m.row(i), mean.data(), m.cols());
  ker::scal(1.0 / static_cast<double>(m.rows()), mean.data(), m.cols());
  return mean;
}

}  // namespace

Cluster shard(const Dataset& data, std::size_t k, const ClusterOptions& options) {
  const std::size_t n_total = data.n();
  if (k < 1) throw ArgumentError("shard: need at least one machine");
  if (k > n_total) throw ArgumentError("shard: more machines than observations");
  if (data.y.rows() != n_total) throw ShapeError("shard: view row counts differ");
  if (!data.x.all_finite() || !data.y.all_finite())
    throw ArgumentError("shard: dataset contains non-finite entries");

  Cluster c;
  c.dx_ = data.x.cols();
  c.dy_ = data.y.cols();
  c.total_rows_ = n_total;
  c.threads_ = options.threads == 0 ? 1 : options.threads;

  const std::size_t base = n_total / k;
  const std::size_t extra = n_total % k;

  c.machines_.resize(k);
  std::size_t row = 0;
  for (std::size_t m = 0; m < k; ++m) {
    const std::size_t take = base + (m < extra ? 1 : 0);
    MachineShard& shard_m = c.machines_[m];
    shard_m.id = m + 1;
    shard_m.x = copy_rows(data.x, row, take);
    shard_m.y = copy_rows(data.y, row, take);
    row += take;
  }

  // Optional global-mean centering: one accounted averaging round before any
  // moment exists.
  Vector mean_x, mean_y;
  if (options.centering == Centering::GlobalMean) {
    const std::size_t d = c.dx_ + c.dy_;
    Vector global_mean(d, 0.0);
    for (std::size_t m = 0; m < k; ++m) {
      const MachineShard& sm = c.machines_[m];
      Vector local = concat(column_mean(sm.x), column_mean(sm.y));
      c.ledger_.to_center("centering", static_cast<std::uint32_t>(m + 1), d);
      const double w = static_cast<double>(sm.x.rows()) / static_cast<double>(n_total);
      ker::axpy(w, local.data(), global_mean.data(), d);
    }
    c.ledger_.to_workers_multicast("centering", d);
    mean_x.assign(global_mean.begin(), global_mean.begin() + static_cast<std::ptrdiff_t>(c.dx_));
    mean_y.assign(global_mean.begin() + static_cast<std::ptrdiff_t>(c.dx_), global_mean.end());
  }

  for (std::size_t m = 0; m < k; ++m) {
    MachineShard& sm = c.machines_[m];
    sm.moments = compute_moments(sm.x, sm.y, mean_x, mean_y, options.ridge);
    sm.deflated_xy.clear();
    sm.deflated_xy.push_back(sm.moments.sxy);
    if (!options.retain_data) {
      sm.x = Matrix();
      sm.y = Matrix();
    }
  }

  // Shard-weighted average of the local moments, accumulated in id order.
  {
    Matrix sxx(c.dx_, c.dx_), syy(c.dy_, c.dy_), sxy(c.dx_, c.dy_);
    for (std::size_t m = 0; m < k; ++m) {
      const double w = c.weight(m);
      ker::axpy(w, c.machines_[m].moments.sxx.mat().data(), sxx.data(), c.dx_ * c.dx_);
      ker::axpy(w, c.machines_[m].moments.syy.mat().data(), syy.data(), c.dy_ * c.dy_);
      ker::axpy(w, c.machines_[m].moments.sxy.data(), sxy.data(), c.dx_ * c.dy_);
    }
    c.global_.sxx = SpdMatrix(std::move(sxx));
    c.global_.syy = SpdMatrix(std::move(syy));
    c.global_.sxy = std::move(sxy);
    c.global_.n = n_total;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Collective operations
// ---------------------------------------------------------------------------

Vector reduce_average(Cluster& cluster, std::string_view round,
                      const std::vector<Vector>& per_machine) {
  const std::size_t k = cluster.machine_count();
  if (per_machine.size() != k) throw ShapeError("reduce_average: need one vector per machine");
  const std::size_t m = per_machine.front().size();
  Vector out(m, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (per_machine[i].size() != m) throw ShapeError("reduce_average: vector length mismatch");
    cluster.ledger().to_center(round, static_cast<std::uint32_t>(i + 1), m);
    ker::axpy(cluster.weight(i), per_machine[i].data(), out.data(), m);
  }
  return out;
}

void broadcast(Cluster& cluster, std::string_view round, std::size_t m) {
  for (std::size_t i = 0; i < cluster.machine_count(); ++i)
    cluster.ledger().to_workers_link(round, static_cast<std::uint32_t>(i + 1), m);
}

namespace {

Vector distributed_auto_product(Cluster& cluster, const Vector& vec, std::string_view round,
                                bool x_side) {
  const std::size_t d = x_side ? cluster.dx() : cluster.dy();
  if (vec.size() != d) throw ShapeError("distributed_matvec: vector length mismatch");
  broadcast(cluster, round, d);

  const std::size_t k = cluster.machine_count();
  std::vector<Vector> locals(k);
  for_each_machine(cluster, [&](std::size_t m) {
    const CovarianceTriple& mom = cluster.machine(m).moments;
    locals[m] = x_side ? matvec(mom.sxx.mat(), vec) : matvec(mom.syy.mat(), vec);
  });
  return reduce_average(cluster, round, locals);
}

}  // namespace

Vector distributed_matvec_x(Cluster& cluster, const Vector& u, std::string_view round) {
  return distributed_auto_product(cluster, u, round, true);
}

Vector distributed_matvec_y(Cluster& cluster, const Vector& v, std::string_view round) {
  return distributed_auto_product(cluster, v, round, false);
}

void for_each_machine(Cluster& cluster, const std::function<void(std::size_t)>& fn) {
  const std::size_t k = cluster.machine_count();
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(cluster.threads(), k));
  if (workers <= 1) {
    for (std::size_t m = 0; m < k; ++m) fn(m);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(k);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t m = next.fetch_add(1);
        if (m >= k) return;
        try {
          fn(m);
        } catch (...) {
          errors[m] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (std::size_t m = 0; m < k; ++m)
    if (errors[m]) std::rethrow_exception(errors[m]);
}

}  // namespace dcca
