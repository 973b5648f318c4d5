#ifndef LCSYM_RNG_HPP_
#define LCSYM_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace lcsym {

// Seeded generator with hand-written transforms so that a seed produces
// the same stream on every standard library (std::*_distribution output
// is implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1), 53 bits.
  double uniform();
  double normal();
  double gamma(double shape);
  double beta(double a, double b);
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Stable 64-bit hash of a label (FNV-1a), used for per-cell seeds.
std::uint64_t hash_label(std::string_view label);

// Seed for one Monte-Carlo replication, a function of its coordinates only.
std::uint64_t derive_seed(std::uint64_t base, std::string_view density_tag,
                          std::uint64_t n, std::uint64_t rep);

}  // namespace lcsym

#endif  // LCSYM_RNG_HPP_
