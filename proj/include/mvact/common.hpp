#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mvact {

enum class ErrorKind {
  validation,  // bad arguments, broken invariants
  parse,       // malformed text input
  structural,  // well-formed input with inconsistent structure
  shape,       // tensor/array dimension mismatch
  range,       // query outside supported domain
  degenerate,  // degenerate numerical input (duplicate knots, ...)
  pairing,     // unresolved sample pairing
  data,        // missing sample/view/modality
  config,      // bad run configuration
  numeric,     // non-finite values, failed numerics
  io,          // filesystem failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  // validation(2) / io(3) / numeric(4) buckets for CLI exit codes
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::io: return 3;
      case ErrorKind::numeric: return 4;
      default: return 2;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// Deterministic counter-based RNG. std:: distributions are
// implementation-defined, so all sampling goes through this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; one sample per call, cached pair discarded for simplicity.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // bounded integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // independent substream keyed by tags; order-free determinism
  Rng fork(std::initializer_list<std::uint64_t> tags) const {
    std::uint64_t h = state_ ^ 0x51ed270b8a5ee61dull;
    for (auto t : tags) {
      h ^= t + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return Rng(h);
  }

 private:
  std::uint64_t state_;
};

// FNV-1a 64-bit; used for output manifests and substream keys.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

// Shortest round-trip decimal text for a double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::vector<unsigned char> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const void* data,
                       std::size_t len);
std::uint64_t hash_file(const std::string& path);

}  // namespace mvact
