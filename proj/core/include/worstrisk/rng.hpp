#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace worstrisk {

/// Deterministic random stream. Sub-streams are derived by hashing
/// (seed, realization, block), so draws for different realizations or blocks
/// are independent by construction and output never depends on scheduling.
/// Normal variates use Box-Muller on mt19937_64 uniforms, which is fully
/// specified by the standard (std::normal_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng substream(std::uint64_t seed, std::uint64_t realization, std::uint64_t block);

  std::uint64_t next_u64();
  double uniform();  // (0, 1]
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace worstrisk
