#ifndef SEROREC_RNG_HPP
#define SEROREC_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace serorec {

// 64-bit finalizer (splitmix64 style); bijective, good avalanche.
std::uint64_t mix64(std::uint64_t x) noexcept;

// FNV-1a over bytes, then mixed; stable across platforms.
std::uint64_t hash_tag(std::string_view tag) noexcept;

// Deterministic random stream. Draws are produced from raw engine words with
// hand-rolled transforms (std::*_distribution output is implementation-defined,
// mt19937_64 itself is fully specified), so sequences are identical across
// compilers. split() derives an independent child stream from a tag; the
// derivation depends only on (key, tag path), never on draw position, so
// streams can be created in any order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key);

  RngStream split(std::uint64_t tag) const;
  RngStream split(std::string_view tag) const;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t next_u64();

  double uniform();                       // (0,1)
  double uniform(double lo, double hi);   // (lo,hi)
  double normal();                        // Box-Muller, one value cached
  double normal(double mean, double sd);
  double gamma(double shape);             // Gamma(shape, 1), Marsaglia-Tsang
  double chi_squared(double dof);

 private:
  std::mt19937_64 eng_;
  std::uint64_t key_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace serorec

#endif
