#include "ecp/rng.hpp"

#include <cmath>

#include "ecp/gaussian.hpp"

namespace ecp {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index) {
  const std::uint64_t tag = (static_cast<std::uint64_t>(stream) << 32) ^ index;
  return splitmix64(master ^ splitmix64(tag));
}

double Rng::rnorm() { return norm_icdf(runif_open()); }

double Rng::rexp() { return -std::log1p(-runif()); }

std::size_t Rng::uniform_index(std::size_t n) {
  // Power-of-two mask rejection; at most one extra draw in expectation.
  if (n <= 1) return 0;
  std::uint64_t mask = n - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  for (;;) {
    const std::uint64_t v = eng_() & mask;
    if (v < n) return static_cast<std::size_t>(v);
  }
}

}  // namespace ecp
