#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ecp/bv_core.hpp"

using namespace ecp;

namespace {

PointFn product_fn(int) {
  return [](std::span<const double> x) {
    double p = 1.0;
    for (double v : x) p *= v;
    return p;
  };
}

// Test-side atom oracle: weight at a grid corner as the alternating corner
// sum of f over the surrounding cell, with f treated as 0 below index 0.
// Independent of the library's sequential difference transform.
std::vector<SignedMeasure::Atom> brute_atoms(const GridStepFunction& f) {
  const int d = f.dim();
  const auto& br = f.axis_breaks();
  std::vector<std::size_t> sizes(d);
  for (int j = 0; j < d; ++j) sizes[j] = br[j].size();

  std::vector<SignedMeasure::Atom> atoms;
  std::vector<int> idx(d, 0);
  for (;;) {
    double w = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
      std::vector<double> p(d);
      bool below = false;
      int bits = 0;
      for (int j = 0; j < d; ++j) {
        int i = idx[j] - (int)((mask >> j) & 1u);
        bits += (int)((mask >> j) & 1u);
        if (i < 0) {
          below = true;
          break;
        }
        p[j] = br[j][i];
      }
      if (below) continue;
      w += ((bits % 2 == 0) ? 1.0 : -1.0) * f.value(p);
    }
    if (w != 0.0) {
      SignedMeasure::Atom a;
      a.loc.resize(d);
      for (int j = 0; j < d; ++j) a.loc[j] = br[j][idx[j]];
      a.weight = w;
      atoms.push_back(a);
    }
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < (int)sizes[j]) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
  return atoms;
}

GridStepFunction constant_gsf(int d, double c) {
  return GridStepFunction(std::vector<std::vector<double>>(d, {0.0}), {c});
}

}  // namespace

TEST_CASE("generalized_volume: product function over a box") {
  Box box({0.2, 0.1}, {0.6, 0.5});
  CHECK(generalized_volume(product_fn(2), box) == doctest::Approx(0.16).epsilon(1e-12));
}

TEST_CASE("generalized_volume: constants vanish") {
  Rng rng(11);
  for (int d = 1; d <= 4; ++d) {
    PointFn f = [](std::span<const double>) { return 7.0; };
    std::vector<double> lo(d), hi(d);
    for (int j = 0; j < d; ++j) {
      double a = rng.runif(), b = rng.runif();
      lo[j] = std::min(a, b);
      hi[j] = std::max(a, b);
    }
    CHECK(generalized_volume(f, Box(lo, hi)) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("generalized_volume: counts atoms of a single-atom measure") {
  SignedMeasure mu;
  mu.dim = 2;
  mu.atoms.push_back({{0.5, 0.5}, 1.0});
  PointFn f = [&](std::span<const double> x) { return mu.cdf(x); };
  Box box({0.4, 0.4}, {0.6, 0.6});
  // oracle: enumerate atoms inside the half-open box
  double expect = 0.0;
  for (const auto& a : mu.atoms) {
    bool in = true;
    for (int j = 0; j < 2; ++j) in = in && box.lower[j] < a.loc[j] && a.loc[j] <= box.upper[j];
    if (in) expect += a.weight;
  }
  CHECK(expect == 1.0);
  CHECK(generalized_volume(f, box) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("projection_measure_weight: product function slices") {
  PointFn f = product_fn(2);
  IndexSet I(2, 0b01);
  std::vector<double> lo{0.2}, hi{0.6};
  std::vector<double> corner1{0.0, 1.0};
  std::vector<double> corner0{0.0, 0.0};
  CHECK(projection_measure_weight(f, 2, I, lo, hi, corner1) == doctest::Approx(0.4));
  CHECK(projection_measure_weight(f, 2, I, lo, hi, corner0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(projection_measure_weight(f, 2, IndexSet::empty(2), {}, {},
                                            corner1),
                  std::invalid_argument);
}

TEST_CASE("projection_measure_weight: matches marginal atom sums on random steps") {
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    GridStepFunction f = random_step_function_jittered(rng, 3, 4);
    const auto atoms = brute_atoms(f);
    IndexSet I(3, 0b010);  // axis 2 of 3
    const double a = 0.25, b = 0.8;
    for (std::uint32_t cmask = 0; cmask < 4; ++cmask) {
      std::vector<double> corner{(cmask & 1u) ? 1.0 : 0.0, 0.0, (cmask & 2u) ? 1.0 : 0.0};
      // oracle: full-dimensional atoms with the projected coordinate inside
      // (a,b] and the frozen coordinates at most the corner values
      double expect = 0.0;
      for (const auto& atom : atoms) {
        if (!(a < atom.loc[1] && atom.loc[1] <= b)) continue;
        if (atom.loc[0] > corner[0] || atom.loc[2] > corner[2]) continue;
        expect += atom.weight;
      }
      const double got =
          projection_measure_weight(f.as_fn(), 3, I, std::vector<double>{a},
                                    std::vector<double>{b}, corner);
      CHECK(got == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("vitali_variation refine: smooth product function") {
  RefineOptions opts;
  opts.tol = 1e-3;
  opts.max_depth = 12;
  const auto res = vitali_variation(product_fn(2), 2, opts);
  CHECK(res.converged);
  CHECK(std::fabs(res.value - 1.0) <= 1e-3);
}

TEST_CASE("vitali_variation: constants") {
  PointFn c = [](std::span<const double>) { return 3.25; };
  const auto res = vitali_variation(c, 2, RefineOptions{});
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(0.0));
  CHECK(vitali_variation(constant_gsf(2, 3.25)) == 0.0);
}

TEST_CASE("vitali_variation exact: one-dimensional jump") {
  GridStepFunction f({{0.0, 0.5}}, {1.0, 0.0});  // 1{x < 0.5}
  CHECK(vitali_variation(f) == doctest::Approx(1.0));
}

TEST_CASE("hk_variation: golden values") {
  RefineOptions opts;
  opts.tol = 1e-3;
  const auto prod = hk_variation(product_fn(2), 2, opts);
  CHECK(prod.converged);
  CHECK(std::fabs(prod.value - 4.0) <= 1e-3);

  CHECK(hk_variation(constant_gsf(3, -2.5)) == doctest::Approx(2.5));

  // 1{v < (0.5, 0.5)}
  GridStepFunction ind({{0.0, 0.5}, {0.0, 0.5}}, {1.0, 0.0, 0.0, 0.0});
  CHECK(hk_variation(ind) == doctest::Approx(1.0));
}

TEST_CASE("as_measure: step examples and the lower-corner atom") {
  GridStepFunction f({{0.0, 0.5}}, {0.0, 1.0});  // 1{x >= 0.5}
  const auto mu = as_measure(f);
  REQUIRE(mu.atoms.size() == 1);
  CHECK(mu.atoms[0].loc[0] == 0.5);
  CHECK(mu.atoms[0].weight == 1.0);

  CHECK(as_measure(constant_gsf(2, 0.0)).atoms.empty());
  // A nonzero constant is carried entirely by the atom at the origin; this is
  // what makes cdf reconstruction exact.
  const auto muc = as_measure(constant_gsf(2, 4.0));
  REQUIRE(muc.atoms.size() == 1);
  CHECK(muc.atoms[0].loc == std::vector<double>{0.0, 0.0});
  CHECK(muc.atoms[0].weight == 4.0);
}

TEST_CASE("as_measure: reconstruction against generalized_volume on random boxes") {
  Rng rng(7);
  GridStepFunction f = random_step_function_jittered(rng, 2, 5);
  const auto mu = as_measure(f);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> lo(2), hi(2);
    for (int j = 0; j < 2; ++j) {
      double a = rng.runif(), b = rng.runif();
      lo[j] = std::min(a, b);
      hi[j] = std::max(a, b);
    }
    Box box(lo, hi);
    double atom_sum = 0.0;
    for (const auto& a : mu.atoms) {
      bool in = true;
      for (int j = 0; j < 2; ++j) in = in && lo[j] < a.loc[j] && a.loc[j] <= hi[j];
      if (in) atom_sum += a.weight;
    }
    CHECK(generalized_volume(f, box) == doctest::Approx(atom_sum).epsilon(1e-11));
  }
}

TEST_CASE("as_measure: agrees with the corner-sum atom oracle") {
  Rng rng(13);
  for (int d = 1; d <= 3; ++d) {
    GridStepFunction f = random_step_function_jittered(rng, d, 4);
    const auto lib = as_measure(f);
    const auto oracle = brute_atoms(f);
    // both enumerate grid corners in row-major order
    REQUIRE(lib.atoms.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CHECK(lib.atoms[i].loc == oracle[i].loc);
      CHECK(lib.atoms[i].weight == doctest::Approx(oracle[i].weight).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: box additivity under splits") {
  Rng rng(23);
  for (int d = 1; d <= 4; ++d) {
    GridStepFunction f = random_step_function_jittered(rng, d, 4);
    for (int rep = 0; rep < 25; ++rep) {
      std::vector<double> lo(d), hi(d);
      for (int j = 0; j < d; ++j) {
        double a = rng.runif(), b = rng.runif();
        lo[j] = std::min(a, b);
        hi[j] = std::max(a, b);
      }
      const int axis = (int)rng.uniform_index(d);
      const double mid = lo[axis] + rng.runif() * (hi[axis] - lo[axis]);
      auto hi1 = hi;
      hi1[axis] = mid;
      auto lo2 = lo;
      lo2[axis] = mid;
      const double whole = generalized_volume(f, Box(lo, hi));
      const double parts =
          generalized_volume(f, Box(lo, hi1)) + generalized_volume(f, Box(lo2, hi));
      CHECK(whole == doctest::Approx(parts).epsilon(1e-11));
    }
  }
}

TEST_CASE("property: projection with full index set equals generalized_volume") {
  Rng rng(29);
  GridStepFunction f = random_step_function_jittered(rng, 3, 4);
  std::vector<double> lo{0.1, 0.2, 0.3}, hi{0.7, 0.9, 0.6};
  std::vector<double> corner(3, 0.0);  // unused: I is everything
  CHECK(projection_measure_weight(f.as_fn(), 3, IndexSet::full(3), lo, hi, corner) ==
        doctest::Approx(generalized_volume(f, Box(lo, hi))).epsilon(1e-12));
}

TEST_CASE("property: dyadic refinement is monotone and dominates ladder sums") {
  Rng rng(31);
  GridStepFunction f = random_step_function_jittered(rng, 2, 5);
  const PointFn fn = f.as_fn();
  double prev = -1.0;
  for (int m = 0; m <= 6; ++m) {
    const double cur = dyadic_partition_sum(fn, 2, m);
    CHECK(cur >= prev - 1e-12);
    if (m >= 1) {
      const double lad = ladder_variation_sum(fn, 2, dyadic_ladder(2, m));
      CHECK(lad <= cur + 1e-12);
    }
    prev = cur;
  }
  CHECK(prev <= vitali_variation(f) + 1e-12);
}

TEST_CASE("property: hk dominates vitali, both nonnegative") {
  Rng rng(37);
  for (int d = 1; d <= 3; ++d)
    for (int rep = 0; rep < 10; ++rep) {
      GridStepFunction f = random_step_function_jittered(rng, d, 4);
      const double v = vitali_variation(f);
      const double hk = hk_variation(f);
      CHECK(v >= 0.0);
      CHECK(hk >= v - 1e-12);
    }
}

TEST_CASE("property: cdf reconstruction at grid corners and at 1") {
  Rng rng(41);
  for (int d = 1; d <= 3; ++d) {
    GridStepFunction f = random_step_function_jittered(rng, d, 5);
    const auto mu = as_measure(f);
    const auto& br = f.axis_breaks();
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
      std::vector<double> p(d);
      for (int j = 0; j < d; ++j) p[j] = br[j][idx[j]];
      CHECK(std::fabs(mu.cdf(p) - f.value(p)) <= 1e-12);
      int j = d - 1;
      for (; j >= 0; --j) {
        if (++idx[j] < br[j].size()) break;
        idx[j] = 0;
      }
      if (j < 0) break;
    }
    const std::vector<double> ones(d, 1.0);
    CHECK(std::fabs(mu.cdf(ones) - f.value(ones)) <= 1e-12);
  }
}

TEST_CASE("left limits of a step function") {
  // value 1 on [0, 0.5) x [0, 0.5), 2 on [0.5, 1] x [0, 0.5), 3 / 4 above
  GridStepFunction f({{0.0, 0.5}, {0.0, 0.5}}, {1.0, 3.0, 2.0, 4.0});
  std::vector<double> p{0.5, 0.25};
  CHECK(f.value(p) == 2.0);
  CHECK(f.value_left(p, IndexSet(2, 0b01)) == 1.0);   // left in x only
  CHECK(f.value_left(p, IndexSet(2, 0b10)) == 2.0);   // y=0.25 is off-grid
  std::vector<double> q{0.5, 0.5};
  CHECK(f.value_left(q, IndexSet::full(2)) == 1.0);
  std::vector<double> at0{0.0, 0.5};
  CHECK(f.value_left(at0, IndexSet::full(2)) == 1.0);  // left limit at 0 is the value at 0
  std::vector<double> at1{1.0, 1.0};
  CHECK(f.value_left(at1, IndexSet::full(2)) == 4.0);
}
