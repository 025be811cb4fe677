#include "spikekal/noise.hpp"

#include <cmath>
#include <numbers>

namespace spikekal {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t hash_name(std::string_view name) noexcept {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t stream_key(std::uint64_t seed, std::string_view name) noexcept {
  return mix64(mix64(seed) ^ hash_name(name));
}

}  // namespace

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t NoiseStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double NoiseStream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::standard_normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd NoiseStream::standard_normal(Eigen::Index size) {
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    out[i] = standard_normal();
  }
  return out;
}

NoiseGenerator::NoiseGenerator(std::uint64_t seed)
    : seed_(seed),
      process_(stream_key(seed, "process")),
      observation_(stream_key(seed, "observation")) {}

NoiseStream NoiseGenerator::split(std::string_view name) const {
  return NoiseStream(stream_key(seed_, name));
}

}  // namespace spikekal
