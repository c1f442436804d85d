#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ecp {

/// Stream tags for deriving independent sub-seeds from one master seed.
/// Every stochastic pipeline derives per-task seeds statelessly from
/// (master, stream, index) so that results do not depend on scheduling.
enum class SeedStream : std::uint64_t {
  sample = 1,
  boot_replicate = 2,
  mc_trial = 3,
  boot_trial = 4,
  centering = 5,
  diag_rep = 6,
  tk_mc = 7,
  pair_gen = 8,
};

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
std::uint64_t splitmix64(std::uint64_t x);

/// seed(master, stream, i) = splitmix64(master ^ splitmix64((stream << 32) ^ i))
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index);

/// Human-readable statement of the derivation rule, embedded in artifacts.
constexpr std::string_view kSeedRule =
    "seed(master,stream,i) = splitmix64(master xor splitmix64((stream<<32) xor i)); "
    "engine = mt19937_64(seed); uniform = (next>>11) * 2^-53";

/// Seeded generator with fixed, implementation-pinned transforms. All
/// distributions are produced from the raw 64-bit stream with explicit
/// arithmetic so that output is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0,1).
  double runif() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1); safe as input to inverse-cdf transforms.
  double runif_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the inverse cdf.
  double rnorm();

  /// Standard exponential.
  double rexp();

  /// Uniform integer in [0, n), unbiased (rejection on the top bits).
  std::size_t uniform_index(std::size_t n);

  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ecp
