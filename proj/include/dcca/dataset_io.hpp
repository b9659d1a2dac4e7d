#pragma once

#include <string>

#include "dcca/matrix.hpp"
#include "dcca/synthetic.hpp"

namespace dcca {

/// Two aligned views of the same observations, covariates scaled into [0, 1].
struct ViewPair {
  std::string name;
  Matrix x, y;
  std::size_t dx() const { return x.cols(); }
  std::size_t dy() const { return y.cols(); }
  std::size_t n() const { return x.rows(); }
  Dataset as_dataset() const { return Dataset{x, y}; }
};

/// IDX image file (magic 0x00000803, big-endian header, unsigned-byte
/// pixels). Row i of the result is image i flattened row-major, scaled by
/// 1/255. Throws FormatError (with the byte offset) on malformed input.
Matrix load_idx_images(const std::string& path);

/// Splits each row, viewed as a width x width pixel grid, into the left and
/// right half-images. X takes grid columns [0, width/2), Y the rest.
ViewPair split_halves(const Matrix& images, std::size_t width = 28);

struct DelimitedOptions {
  char delimiter = ',';  // ' ' treats any run of blanks as one separator
  bool skip_header = false;
};

/// Loads two delimited numeric tables with equal row counts and min-max
/// scales every column to [0, 1] (constant columns map to 0). Parse errors
/// carry the 1-based line number.
ViewPair load_delimited_views(const std::string& path_x, const std::string& path_y,
                              const DelimitedOptions& options = {});

/// Per-column min-max scaling onto [0, 1]; constant columns become 0.
void minmax_scale(Matrix& m);

}  // namespace dcca
