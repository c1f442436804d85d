#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ecp/gaussian.hpp"
#include "ecp/parallel.hpp"
#include "ecp/rng.hpp"

using namespace ecp;

TEST_CASE("derive_seed: stateless and stream-separated") {
  CHECK(derive_seed(42, SeedStream::boot_replicate, 7) ==
        derive_seed(42, SeedStream::boot_replicate, 7));
  CHECK(derive_seed(42, SeedStream::boot_replicate, 7) !=
        derive_seed(42, SeedStream::boot_replicate, 8));
  CHECK(derive_seed(42, SeedStream::boot_replicate, 7) !=
        derive_seed(42, SeedStream::mc_trial, 7));
  CHECK(derive_seed(42, SeedStream::boot_replicate, 7) !=
        derive_seed(43, SeedStream::boot_replicate, 7));
}

TEST_CASE("Rng: ranges and determinism") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.runif();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.runif());
  }
  Rng c(9);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = c.uniform_index(7);
    CHECK(k < 7);
  }
  Rng d(10);
  for (int i = 0; i < 100; ++i) CHECK(d.rexp() >= 0.0);
}

TEST_CASE("norm_icdf inverts norm_cdf") {
  for (double p : {1e-10, 1e-4, 0.02, 0.3, 0.5, 0.7, 0.975, 1.0 - 1e-6}) {
    const double x = norm_icdf(p);
    CHECK(std::fabs(norm_cdf(x) - p) <= 1e-12 * std::max(1.0, std::fabs(p)));
  }
  CHECK(norm_icdf(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  // classical two-sided critical value
  CHECK(norm_icdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}

TEST_CASE("bvn_cdf: closed-form diagonal values and limits") {
  constexpr double pi = 3.14159265358979323846;
  for (double rho : {-0.9, -0.5, 0.0, 0.3, 0.5, 0.95}) {
    const double expect = 0.25 + std::asin(rho) / (2.0 * pi);
    CHECK(bvn_cdf(0.0, 0.0, rho) == doctest::Approx(expect).epsilon(1e-10));
  }
  // independence factorizes
  CHECK(bvn_cdf(0.7, -0.3, 0.0) ==
        doctest::Approx(norm_cdf(0.7) * norm_cdf(-0.3)).epsilon(1e-12));
  // monotone in rho at the origin
  CHECK(bvn_cdf(0.0, 0.0, 0.99) > bvn_cdf(0.0, 0.0, 0.5));
  // near-comonotone and near-antithetic limits
  CHECK(bvn_cdf(0.5, 1.2, 0.999999) == doctest::Approx(norm_cdf(0.5)).epsilon(1e-5));
  CHECK(bvn_cdf(0.5, -0.5, -0.999999) == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("parallel_for: full coverage and the same answer for any budget") {
  for (unsigned budget : {1u, 3u, 8u}) {
    set_thread_budget(budget);
    std::vector<int> hits(257, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] = static_cast<int>(i); });
    for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == static_cast<int>(i));
  }
  set_thread_budget(0);
}

TEST_CASE("parallel_for: nested calls do not deadlock or double-run") {
  set_thread_budget(4);
  std::vector<std::atomic<int>> hits(64);
  parallel_for(8, [&](std::size_t outer) {
    parallel_for(8, [&](std::size_t inner) { hits[outer * 8 + inner].fetch_add(1); });
  });
  for (auto& h : hits) CHECK(h.load() == 1);
  set_thread_budget(0);
}

TEST_CASE("parallel_for: exceptions propagate") {
  set_thread_budget(3);
  CHECK_THROWS_AS(parallel_for(16,
                               [&](std::size_t i) {
                                 if (i == 5) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  set_thread_budget(0);
}
