#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ecp/index_classes.hpp"

using namespace ecp;

TEST_CASE("mgf class: grid, constant member and gradients") {
  const IndexClass cls = parse_class_spec("mgf:grid=3", 2);
  CHECK(cls.functions.size() == 9);
  // t = (0,0) is the constant function 1 with zero gradient
  const auto& g0 = cls.functions.front();
  CHECK(g0.params == std::vector<double>{0.0, 0.0});
  std::vector<double> x{0.3, 0.8};
  CHECK(g0.eval(x) == 1.0);
  CHECK(g0.gradient(x, 0) == 0.0);
  CHECK(g0.gradient(x, 1) == 0.0);
}

TEST_CASE("indicator class: interior corners with unit variation bound") {
  const IndexClass cls = parse_class_spec("indicator:grid=3", 2);
  CHECK(cls.functions.size() == 9);
  for (const auto& g : cls.functions) {
    CHECK(g.has_box_measure());
    CHECK(g.hk_bound == doctest::Approx(1.0));
    // strict inequality: 1{x < u}
    CHECK(g.eval(g.params) == 0.0);
    std::vector<double> below{g.params[0] - 1e-9, g.params[1] - 1e-9};
    CHECK(g.eval(below) == 1.0);
  }
}

TEST_CASE("step class: every member honors the variation cap exactly") {
  const IndexClass cls = parse_class_spec("step:res=8,count=20,T=5,seed=7", 2);
  CHECK(cls.functions.size() == 20);
  for (const auto& g : cls.functions) {
    REQUIRE(g.has_box_measure());
    CHECK(hk_variation(*g.box_measure) <= 5.0 + 1e-9);
    CHECK(g.hk_bound <= 5.0 + 1e-9);
  }
  // seeded rebuild is identical
  const IndexClass again = parse_class_spec("step:res=8,count=20,T=5,seed=7", 2);
  for (std::size_t m = 0; m < cls.functions.size(); ++m)
    CHECK(cls.functions[m].box_measure->cell_values() ==
          again.functions[m].box_measure->cell_values());
}

TEST_CASE("gradient correctness: central differences at random points") {
  Rng rng(55);
  for (const char* spec : {"mgf:grid=3", "poly:deg=3"}) {
    const IndexClass cls = parse_class_spec(spec, 2);
    for (const auto& g : cls.functions) {
      REQUIRE(g.has_gradient());
      for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> x{0.05 + 0.9 * rng.runif(), 0.05 + 0.9 * rng.runif()};
        for (int k = 0; k < 2; ++k) {
          const double h = 1e-5;
          auto xp = x, xm = x;
          xp[k] += h;
          xm[k] -= h;
          const double fd = (g.eval(xp) - g.eval(xm)) / (2.0 * h);
          const double an = g.gradient(x, k);
          CHECK(std::fabs(fd - an) <= 1e-6 * (1.0 + std::fabs(an)));
        }
      }
    }
  }
}

TEST_CASE("mgf monotonicity: nonnegative box measure") {
  Rng rng(66);
  const IndexClass cls = parse_class_spec("mgf:grid=3", 2);
  for (const auto& g : cls.functions)
    for (int rep = 0; rep < 40; ++rep) {
      std::vector<double> lo(2), hi(2);
      for (int j = 0; j < 2; ++j) {
        const double a = rng.runif(), b = rng.runif();
        lo[j] = std::min(a, b);
        hi[j] = std::max(a, b);
      }
      CHECK(generalized_volume(g.eval, Box(lo, hi)) >= -1e-12);
    }
}

TEST_CASE("class_hk_bound: golden values") {
  // constants: only the anchored-at-one term survives
  ClassSpec cs;
  cs.kind = ClassKind::polynomial;
  cs.dim = 2;
  cs.degree = 0;
  const IndexClass constants = build_class(cs);
  REQUIRE(constants.functions.size() == 1);
  const auto b0 = class_hk_bound(constants);
  CHECK(b0.converged);
  CHECK(b0.value == doctest::Approx(1.0).epsilon(1e-9));

  // the product monomial dominates the degree-2 class
  const IndexClass poly = parse_class_spec("poly:deg=2", 2);
  const auto bp = class_hk_bound(poly);
  CHECK(bp.converged);
  CHECK(bp.value == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("mgf hk bound: ladder refinement meets the mixed-derivative bound") {
  // single member with t = (1,1)
  ClassSpec cs;
  cs.kind = ClassKind::mgf;
  cs.dim = 2;
  cs.grid = 1;
  const IndexClass cls = build_class(cs);
  REQUIRE(cls.functions.size() == 1);
  const auto& g = cls.functions.front();
  CHECK(g.params == std::vector<double>{1.0, 1.0});

  RefineOptions opts;
  opts.tol = 1e-6;
  const auto refined = hk_variation(g.eval, 2, opts);
  CHECK(refined.converged);
  // stored analytic bound
  CHECK(refined.value == doctest::Approx(g.hk_bound).epsilon(1e-8));
  // cross-check: full-dimensional term equals the integral of the mixed
  // derivative (e^{x+y} has nonnegative mixed derivative, with equality), and
  // the anchored one-dimensional terms close the sum
  const double e = std::exp(1.0);
  const double expect = (e - 1.0) * (e - 1.0) + 2.0 * e * (e - 1.0) + e * e;
  CHECK(refined.value == doctest::Approx(expect).epsilon(1e-8));
  const auto vit = vitali_variation(g.eval, 2, opts);
  CHECK(vit.value == doctest::Approx((e - 1.0) * (e - 1.0)).epsilon(1e-8));
}

TEST_CASE("eval_all matches member-wise evaluation") {
  Rng rng(88);
  for (const char* spec :
       {"mgf:grid=3", "poly:deg=2", "indicator:grid=2", "step:res=4,count=3,T=2,seed=1"}) {
    const IndexClass cls = parse_class_spec(spec, 2);
    std::vector<double> out(cls.functions.size());
    for (int rep = 0; rep < 25; ++rep) {
      std::vector<double> x{rng.runif(), rng.runif()};
      eval_all(cls, x, out);
      for (std::size_t m = 0; m < cls.functions.size(); ++m)
        CHECK(out[m] == doctest::Approx(cls.functions[m].eval(x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("class spec validation") {
  CHECK_THROWS_AS(parse_class_spec("mgf:grid=0", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_class_spec("step:res=4,count=3,T=0,seed=1", 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_class_spec("step:res=4,count=0,T=1,seed=1", 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_class_spec("fourier:grid=3", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_class_spec("poly:deg=9", 2), std::invalid_argument);
}
