#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

#include <Eigen/Core>

namespace pfol {

/// SplitMix64 generator. Small state makes it cheap to spin up one
/// generator per (seed, stream, round, sample) key.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Logical owners of random streams. Values are part of the replay contract.
enum class StreamDomain : std::uint64_t {
  learner = 1,
  adversary = 2,
  analysis = 3,
};

std::uint64_t mix64(std::uint64_t x);

/// FNV-1a; stable across platforms, used for stream ids and config hashes.
std::uint64_t fnv1a64(std::string_view text);

/// Independent generator for key (seed, domain, t, j). Changing the number of
/// samples drawn in round t never shifts the streams of other rounds.
Rng substream(std::uint64_t seed, StreamDomain domain, std::uint64_t t, std::uint64_t j = 0);

/// Uniform over the closed unit ball: normalized Gaussian direction scaled by U^{1/d}.
Eigen::VectorXd sample_unit_ball(Rng& rng, int dim);

/// Uniform over the unit sphere.
Eigen::VectorXd sample_unit_sphere(Rng& rng, int dim);

}  // namespace pfol
