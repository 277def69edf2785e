#include "rng.hpp"

#include <cmath>

#include "errors.hpp"

namespace iuq {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer; full-avalanche 64-bit bijection.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Fold one 64-bit word into a key. Bijective in x for fixed key, so label
// collisions reduce to hash collisions of the mixer.
std::uint64_t absorb(std::uint64_t key, std::uint64_t x) {
  return mix64(key + kGamma + x);
}

}  // namespace

RngStream RngStream::from_seed(MasterSeed seed) {
  return RngStream(absorb(0x8E51ECA4A3D4C201ull, seed.value));
}

RngStream RngStream::derive(std::string_view name) const {
  return RngStream(absorb(key_, fnv1a(name)));
}

RngStream RngStream::derive(std::string_view name, std::uint64_t index) const {
  return RngStream(absorb(absorb(key_, fnv1a(name)), index));
}

std::uint64_t RngStream::next_u64() {
  counter_ += 1;
  return mix64(key_ + counter_ * kGamma);
}

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_exponential(double rate) {
  return exponential_icdf(next_uniform(), rate);
}

std::size_t RngStream::draw_index(std::size_t n) {
  if (n == 0) {
    throw Error::invalid_input("draw_index: empty support");
  }
  auto i = static_cast<std::size_t>(next_uniform() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

double exponential_icdf(double u, double rate) {
  if (!(rate > 0.0)) {
    throw Error::invalid_parameter("exponential rate must be positive");
  }
  if (!(u >= 0.0 && u < 1.0)) {
    throw Error::invalid_parameter("exponential icdf argument outside [0,1)");
  }
  // log1p keeps -ln(1-u) accurate for small u.
  return -std::log1p(-u) / rate;
}

}  // namespace iuq
