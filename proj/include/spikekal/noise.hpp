#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace spikekal {

/// One counter-based random stream. The k-th draw is a pure function of
/// (key, k), so two streams with the same key produce the same sequence
/// no matter how they are interleaved with other streams.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double standard_normal();
  /// Vector of iid N(0, 1) samples.
  Eigen::VectorXd standard_normal(Eigen::Index size);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seeded source of the independent noise streams a scenario needs.
/// Process and observation noise live on separate streams so that
/// changing one never perturbs the other.
class NoiseGenerator {
 public:
  explicit NoiseGenerator(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  NoiseStream& process() noexcept { return process_; }
  NoiseStream& observation() noexcept { return observation_; }

  /// Fresh stream derived from the seed and a name. Same name, same stream.
  NoiseStream split(std::string_view name) const;

 private:
  std::uint64_t seed_;
  NoiseStream process_;
  NoiseStream observation_;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace spikekal
