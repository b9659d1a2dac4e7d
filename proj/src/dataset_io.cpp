#include "dcca/dataset_io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <vector>

#include "dcca/errors.hpp"

namespace dcca {

namespace {

std::uint32_t read_be32(std::ifstream& f, std::size_t offset, const std::string& path) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw FormatError("idx: truncated header in " + path, offset);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

Matrix load_idx_images(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("idx: cannot open " + path, 0);

  const std::uint32_t magic = read_be32(f, 0, path);
  if (magic != 0x00000803u)
    throw FormatError("idx: bad magic (expected 0x00000803) in " + path, 0);
  const std::uint32_t count = read_be32(f, 4, path);
  const std::uint32_t height = read_be32(f, 8, path);
  const std::uint32_t width = read_be32(f, 12, path);

  const std::size_t pixels = std::size_t(height) * width;
  Matrix out(count, pixels);
  std::vector<unsigned char> row(pixels);
  for (std::uint32_t i = 0; i < count; ++i) {
    f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(pixels));
    if (!f)
      throw FormatError("idx: truncated payload in " + path,
                        16 + std::size_t(i) * pixels + static_cast<std::size_t>(f.gcount()));
    double* dst = out.row(i);
    for (std::size_t j = 0; j < pixels; ++j) dst[j] = row[j] / 255.0;
  }
  // Trailing bytes mean the header undersells the payload.
  f.peek();
  if (!f.eof())
    throw FormatError("idx: trailing bytes after declared payload in " + path,
                      16 + std::size_t(count) * pixels);
  return out;
}

ViewPair split_halves(const Matrix& images, std::size_t width) {
  if (width == 0 || width % 2 != 0) throw ArgumentError("split_halves: width must be even");
  if (images.cols() != width * width)
    throw ArgumentError("split_halves: column count is not width^2");
  const std::size_t half = width / 2;

  ViewPair out;
  out.name = "halves";
  out.x = Matrix(images.rows(), width * half);
  out.y = Matrix(images.rows(), width * half);
  for (std::size_t i = 0; i < images.rows(); ++i) {
    const double* src = images.row(i);
    double* xl = out.x.row(i);
    double* yr = out.y.row(i);
    for (std::size_t r = 0; r < width; ++r) {
      for (std::size_t c = 0; c < half; ++c) {
        xl[r * half + c] = src[r * width + c];
        yr[r * half + c] = src[r * width + half + c];
      }
    }
  }
  return out;
}

namespace {

Matrix load_delimited(const std::string& path, const DelimitedOptions& opt) {
  std::ifstream f(path);
  if (!f) throw FormatError("delimited: cannot open " + path, 0);

  std::vector<double> values;
  std::size_t cols = 0, rows = 0;
  std::string line;
  std::size_t lineno = 0;
  const bool blanks = (opt.delimiter == ' ' || opt.delimiter == '\t');

  while (std::getline(f, line)) {
    ++lineno;
    if (opt.skip_header && lineno == 1) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::size_t row_cols = 0;
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end) {
      if (blanks) {
        while (p < end && (*p == ' ' || *p == '\t')) ++p;
        if (p >= end) break;
      }
      char* next = nullptr;
      errno = 0;
      const double v = std::strtod(p, &next);
      if (next == p || errno == ERANGE)
        throw FormatError("delimited: non-numeric field in " + path + " at line " +
                              std::to_string(lineno),
                          lineno);
      values.push_back(v);
      ++row_cols;
      p = next;
      if (blanks) continue;
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p < end) {
        if (*p != opt.delimiter)
          throw FormatError("delimited: unexpected character in " + path + " at line " +
                                std::to_string(lineno),
                            lineno);
        ++p;
      }
    }
    if (cols == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw FormatError("delimited: ragged row in " + path + " at line " + std::to_string(lineno),
                        lineno);
    }
    ++rows;
  }
  if (rows == 0 || cols == 0) throw FormatError("delimited: no data rows in " + path, lineno);

  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

}  // namespace

void minmax_scale(Matrix& m) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      lo = std::min(lo, m(i, j));
      hi = std::max(hi, m(i, j));
    }
    const double span = hi - lo;
    if (span <= 0.0) {
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = 0.0;
    } else {
      const double inv = 1.0 / span;
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = (m(i, j) - lo) * inv;
    }
  }
}

ViewPair load_delimited_views(const std::string& path_x, const std::string& path_y,
                              const DelimitedOptions& options) {
  ViewPair out;
  out.name = path_x + "|" + path_y;
  out.x = load_delimited(path_x, options);
  out.y = load_delimited(path_y, options);
  if (out.x.rows() != out.y.rows())
    throw FormatError("delimited: row counts differ between " + path_x + " and " + path_y,
                      out.y.rows());
  if (!out.x.all_finite() || !out.y.all_finite())
    throw FormatError("delimited: non-finite values after parsing", 0);
  minmax_scale(out.x);
  minmax_scale(out.y);
  return out;
}

}  // namespace dcca
