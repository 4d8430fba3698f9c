#include "serorec/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace serorec {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return mix64(h);
}

RngStream::RngStream(std::uint64_t key) : eng_(mix64(key)), key_(key) {}

RngStream RngStream::split(std::uint64_t tag) const {
  return RngStream(mix64(key_ ^ mix64(tag)));
}

RngStream RngStream::split(std::string_view tag) const {
  return split(hash_tag(tag));
}

std::uint64_t RngStream::next_u64() { return eng_(); }

double RngStream::uniform() {
  // 53-bit mantissa, offset by half an ulp so 0 and 1 are excluded.
  return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("uniform: lo must be < hi");
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

double RngStream::normal(double mean, double sd) { return mean + sd * normal(); }

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
  if (shape < 1.0) {
    // boost via Gamma(shape+1) and a uniform power
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

}  // namespace serorec
