#include "worstrisk/rng.hpp"

#include <cmath>

namespace worstrisk {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

Rng Rng::substream(std::uint64_t seed, std::uint64_t realization, std::uint64_t block) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (0xA0761D6478BD642FULL + realization));
  s = splitmix64(s ^ (0xE7037ED1A0B428DBULL + block));
  Rng r(0);
  r.engine_.seed(s);
  return r;
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  // top 53 bits, mapped to (0, 1] so log() below is always finite
  const std::uint64_t u = engine_() >> 11;
  return (static_cast<double>(u) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

std::size_t Rng::index(std::size_t n) {
  // rejection sampling avoids modulo bias
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t u;
  do {
    u = engine_();
  } while (u >= limit);
  return static_cast<std::size_t>(u % n);
}

}  // namespace worstrisk
