#include "dcca/synthetic.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

#include "dcca/errors.hpp"
#include "dcca/linalg.hpp"
#include "dcca/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model fixture format is little-endian");

namespace dcca {

namespace {

// Stream tags; part of the reproducibility contract together with
// derive_stream().
enum StreamTag : std::uint64_t {
  kSigmaX = 1,
  kSigmaY = 2,
  kPhi = 3,
  kPsi = 4,
  kSamples = 5,
};

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t key) {
  Matrix m(rows, cols);
  GaussianStream g(key);
  g.fill(m.data(), rows * cols);
  return m;
}

SpdMatrix random_auto_covariance(std::size_t d, std::uint64_t key) {
  Matrix z = gaussian_matrix(d, d, key);
  Matrix s = z + transpose(z);
  const double nrm = spectral_norm(s);
  Matrix sx = Matrix::identity(d);
  if (nrm > 0.0) sx = sx + (0.5 / nrm) * s;
  return SpdMatrix(std::move(sx));
}

}  // namespace

Matrix PopulationModel::joint_covariance() const {
  const std::size_t d = dx + dy;
  Matrix j(d, d);
  for (std::size_t i = 0; i < dx; ++i)
    for (std::size_t k = 0; k < dx; ++k) j(i, k) = sigma_x(i, k);
  for (std::size_t i = 0; i < dy; ++i)
    for (std::size_t k = 0; k < dy; ++k) j(dx + i, dx + k) = sigma_y(i, k);
  for (std::size_t i = 0; i < dx; ++i)
    for (std::size_t k = 0; k < dy; ++k) {
      j(i, dx + k) = sigma_xy(i, k);
      j(dx + k, i) = sigma_xy(i, k);
    }
  return j;
}

PopulationModel gen_population(std::size_t dx, std::size_t dy, double delta, std::uint64_t seed,
                               std::size_t r) {
  if (dx < 2 || dy < 2) throw ArgumentError("gen_population: dimensions must be at least 2");
  if (!(delta > 0.0) || delta > 0.3)
    throw ArgumentError("gen_population: delta must lie in (0, 0.3]");
  const std::size_t rank_cap = std::min(dx, dy);
  if (r == 0) r = rank_cap;
  if (r > rank_cap) throw ArgumentError("gen_population: r exceeds min(dx, dy)");

  PopulationModel m;
  m.dx = dx;
  m.dy = dy;
  m.r = r;
  m.delta = delta;
  m.sigma_x = random_auto_covariance(dx, derive_stream(seed, kSigmaX));
  m.sigma_y = random_auto_covariance(dy, derive_stream(seed, kSigmaY));

  Matrix phi = gram_schmidt(gaussian_matrix(dx, r, derive_stream(seed, kPhi)));
  Matrix psi = gram_schmidt(gaussian_matrix(dy, r, derive_stream(seed, kPsi)));

  Vector d_diag(r, 0.1);
  if (r > 0) d_diag[0] += 3.0 * delta;
  if (r > 1) d_diag[1] += 2.0 * delta;
  if (r > 2) d_diag[2] += delta;

  Matrix phi_d = phi;  // phi * D
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < dx; ++i) phi_d(i, j) *= d_diag[j];

  const Matrix sqrt_x = spd_sqrt(m.sigma_x);
  const Matrix sqrt_y = spd_sqrt(m.sigma_y);
  m.sigma_xy = matmul(sqrt_x, matmul_nt(phi_d, matmul(sqrt_y, psi)));

  m.u_star = matmul(inv_sqrt(m.sigma_x), phi);
  m.v_star = matmul(inv_sqrt(m.sigma_y), psi);

  m.rho_star.assign(std::max(dx, dy), 0.0);
  for (std::size_t j = 0; j < r; ++j) m.rho_star[j] = d_diag[j];
  return m;
}

Dataset sample(const PopulationModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("sample: need at least one observation");
  const std::size_t d = model.dx + model.dy;

  Matrix chol_lower;
  try {
    chol_lower = cholesky(SpdMatrix(model.joint_covariance()));
  } catch (const NearSingularError& e) {
    throw Error(std::string("sample: joint covariance is not positive definite (") + e.what() +
                ")");
  }

  Matrix z = gaussian_matrix(n, d, derive_stream(seed, kSamples));
  Matrix w = matmul_nt(z, chol_lower);  // rows are L z_i

  Dataset out;
  out.x = Matrix(n, model.dx);
  out.y = Matrix(n, model.dy);
  for (std::size_t i = 0; i < n; ++i) {
    const double* wr = w.row(i);
    double* xr = out.x.row(i);
    double* yr = out.y.row(i);
    for (std::size_t j = 0; j < model.dx; ++j) xr[j] = wr[j];
    for (std::size_t j = 0; j < model.dy; ++j) yr[j] = wr[model.dx + j];
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'D', 'C', 'C', 'A', 'P', 'M', '0', '1'};

void write_u64(std::ofstream& f, std::uint64_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64s(std::ofstream& f, const double* p, std::size_t n) {
  f.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
std::uint64_t read_u64(std::ifstream& f) {
  std::uint64_t v = 0;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
void read_f64s(std::ifstream& f, double* p, std::size_t n) {
  f.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void dump_model(const PopulationModel& m, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("dump_model: cannot open " + path);
  f.write(kMagic, sizeof kMagic);
  write_u64(f, m.dx);
  write_u64(f, m.dy);
  write_u64(f, m.r);
  write_f64s(f, &m.delta, 1);
  write_f64s(f, m.sigma_x.mat().data(), m.dx * m.dx);
  write_f64s(f, m.sigma_y.mat().data(), m.dy * m.dy);
  write_f64s(f, m.sigma_xy.data(), m.dx * m.dy);
  write_f64s(f, m.u_star.data(), m.dx * m.r);
  write_f64s(f, m.v_star.data(), m.dy * m.r);
  write_f64s(f, m.rho_star.data(), m.rho_star.size());
  if (!f) throw Error("dump_model: write failed for " + path);
}

PopulationModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("load_model: cannot open " + path, 0);
  char magic[8];
  f.read(magic, sizeof magic);
  for (std::size_t i = 0; i < sizeof magic; ++i)
    if (!f || magic[i] != kMagic[i]) throw FormatError("load_model: bad magic in " + path, i);

  PopulationModel m;
  m.dx = read_u64(f);
  m.dy = read_u64(f);
  m.r = read_u64(f);
  read_f64s(f, &m.delta, 1);
  if (!f || m.dx == 0 || m.dy == 0 || m.r > std::min(m.dx, m.dy))
    throw FormatError("load_model: inconsistent header in " + path, 8);

  Matrix sx(m.dx, m.dx), sy(m.dy, m.dy);
  read_f64s(f, sx.data(), m.dx * m.dx);
  read_f64s(f, sy.data(), m.dy * m.dy);
  m.sigma_xy = Matrix(m.dx, m.dy);
  read_f64s(f, m.sigma_xy.data(), m.dx * m.dy);
  m.u_star = Matrix(m.dx, m.r);
  m.v_star = Matrix(m.dy, m.r);
  read_f64s(f, m.u_star.data(), m.dx * m.r);
  read_f64s(f, m.v_star.data(), m.dy * m.r);
  m.rho_star.assign(std::max(m.dx, m.dy), 0.0);
  read_f64s(f, m.rho_star.data(), m.rho_star.size());
  if (!f) throw FormatError("load_model: truncated payload in " + path, 0);
  m.sigma_x = SpdMatrix(std::move(sx));
  m.sigma_y = SpdMatrix(std::move(sy));
  return m;
}

}  // namespace dcca
