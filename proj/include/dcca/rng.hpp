#pragma once

#include <cstdint>
#include <cstddef>
#include <cmath>

// Reproducible random numbers built on Philox4x32-10, a counter-based
// generator: output depends only on (key, counter), so any (seed, stream)
// pair names a deterministic sequence regardless of call interleaving.
//
// Stream splitting: derive_stream(seed, tag) hashes the pair through the
// SplitMix64 finalizer. All replication / purpose seeds in the harness are
// derived this way; the chain is part of the reproducibility contract.

namespace dcca {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z += kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed) ^ mix64(tag ^ 0xA5A5A5A5A5A5A5A5ull));
}

class Philox {
 public:
  explicit Philox(std::uint64_t key)
      : key0_(static_cast<std::uint32_t>(key)), key1_(static_cast<std::uint32_t>(key >> 32)) {}

  std::uint64_t next_u64() {
    if (have_ == 0) refill();
    return buf_[--have_];
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe under log().
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
  }
  static std::uint32_t mullo(std::uint32_t a, std::uint32_t b) { return a * b; }

  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
    std::uint32_t c2 = 0, c3 = 0;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint32_t hi0 = mulhi(0xD2511F53u, c0);
      const std::uint32_t lo0 = mullo(0xD2511F53u, c0);
      const std::uint32_t hi1 = mulhi(0xCD9E8D57u, c2);
      const std::uint32_t lo1 = mullo(0xCD9E8D57u, c2);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buf_[1] = (static_cast<std::uint64_t>(c1) << 32) | c0;
    buf_[0] = (static_cast<std::uint64_t>(c3) << 32) | c2;
    have_ = 2;
    ++counter_;
  }

  std::uint32_t key0_, key1_;
  std::uint64_t counter_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int have_ = 0;
};

/// Standard normals via Box-Muller; consumes exactly two uniforms per pair.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t key) : rng_(key) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = rng_.next_double_open();
    const double u2 = rng_.next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  void fill(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = next();
  }

 private:
  Philox rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dcca
