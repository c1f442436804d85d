#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ecp/empirical_process.hpp"
#include "ecp/stieltjes.hpp"

using namespace ecp;

namespace {

SampleMatrix matrix(std::vector<std::vector<double>> rows) {
  SampleMatrix s;
  s.n = rows.size();
  s.dim = static_cast<int>(rows.front().size());
  for (const auto& r : rows) s.values.insert(s.values.end(), r.begin(), r.end());
  return s;
}

}  // namespace

TEST_CASE("pseudo_observations: hand-enumerated ranks") {
  const auto s = matrix({{0.1, 0.9}, {0.4, 0.3}});
  const auto ps = pseudo_observations(s);
  CHECK(ps.at(0, 0) == 0.5);
  CHECK(ps.at(0, 1) == 1.0);
  CHECK(ps.at(1, 0) == 1.0);
  CHECK(ps.at(1, 1) == 0.5);
}

TEST_CASE("pseudo_observations: single row and rank invariance") {
  const auto one = pseudo_observations(matrix({{0.3, 0.7, 0.1}}));
  for (int j = 0; j < 3; ++j) CHECK(one.at(0, j) == 1.0);

  const auto s = CopulaModel::independence(2).sample(200, 17);
  auto cubed = s;
  for (std::size_t i = 0; i < s.n; ++i)
    cubed.values[i * 2] = std::pow(s.values[i * 2], 3.0);
  CHECK(pseudo_observations(s).ranks == pseudo_observations(cubed).ranks);
}

TEST_CASE("empirical copulas: small-sample values") {
  const auto ps = pseudo_observations(matrix({{0.1, 0.9}, {0.4, 0.3}}));
  const auto at_half = empirical_copulas(ps, std::vector<double>{0.5, 0.5});
  CHECK(at_half.cadlag == 0.0);  // neither row has both ranks <= 0.5
  const auto at_one = empirical_copulas(ps, std::vector<double>{1.0, 1.0});
  CHECK(at_one.cadlag == 1.0);
  CHECK(at_one.inverse == 1.0);
  const auto at_zero = empirical_copulas(ps, std::vector<double>{0.0, 0.7});
  CHECK(at_zero.cadlag == 0.0);
  CHECK(at_zero.inverse == 0.0);
}

TEST_CASE("empirical copulas: cadlag marginal is the rank floor") {
  const auto s = CopulaModel::independence(2).sample(50, 4);
  const auto ps = pseudo_observations(s);
  for (double u : {0.07, 0.37, 0.81, 0.995}) {
    const auto v = empirical_copulas(ps, std::vector<double>{u, 1.0});
    CHECK(v.cadlag == doctest::Approx(std::floor(50.0 * u) / 50.0).epsilon(1e-14));
  }
}

TEST_CASE("empirical copulas: the two versions stay within 2/n") {
  for (const char* spec : {"indep:d=2", "mo:alpha=0.5,beta=0.5"}) {
    const auto model = parse_model_spec(spec);
    for (std::size_t n : {50u, 200u}) {
      for (int rep = 0; rep < 10; ++rep) {
        const auto s = model.sample(n, 1000 + rep);
        const auto ps = pseudo_observations(s);
        double sup = 0.0;
        for (int a = 1; a <= 50; ++a)
          for (int b = 1; b <= 50; ++b) {
            const auto v =
                empirical_copulas(ps, std::vector<double>{a / 50.0, b / 50.0});
            sup = std::max(sup, std::fabs(v.cadlag - v.inverse));
          }
        CHECK(std::sqrt(static_cast<double>(n)) * sup <=
              2.0 / std::sqrt(static_cast<double>(n)) + 1e-12);
      }
    }
  }
}

TEST_CASE("process_value: constants vanish for any sample") {
  const auto model = CopulaModel::independence(2);
  const IndexClass constants = parse_class_spec("poly:deg=0", 2);
  const auto ps = pseudo_observations(model.sample(64, 9));
  Centering c;
  c.model = &model;
  CHECK(process_value(ps, constants.functions.front(), c) == 0.0);
}

TEST_CASE("process_value: indicator recovery off the rank grid is exact") {
  const auto model = CopulaModel::independence(2);
  const auto ps = pseudo_observations(model.sample(100, 21));
  Centering c;
  c.model = &model;
  for (const auto& u : {std::vector<double>{0.377, 0.613},
                        std::vector<double>{0.101, 0.899}}) {
    ClassSpec cs;
    cs.kind = ClassKind::indicator;
    cs.dim = 2;
    cs.grid = 1;
    IndexFunction g = build_class(cs).functions.front();
    // replace the grid corner by the requested off-grid point
    IndexClass tmp;
    GridStepFunction ind({{0.0, u[0]}, {0.0, u[1]}}, {1.0, 0.0, 0.0, 0.0});
    g.id = "ind(custom)";
    g.params = u;
    g.box_measure = std::make_shared<const GridStepFunction>(ind);
    g.eval = [gsf = g.box_measure](std::span<const double> x) { return gsf->value(x); };

    const double z = process_value(ps, g, c);
    const auto v = empirical_copulas(ps, u);
    const double expect = std::sqrt(100.0) * (v.cadlag - model.cdf(u));
    CHECK(std::fabs(z - expect) <= 1e-12);
  }
}

TEST_CASE("process_value: dual computation for the product monomial") {
  const auto model = CopulaModel::independence(2);
  const auto ps = pseudo_observations(model.sample(150, 33));
  IndexClass poly = parse_class_spec("poly:deg=2", 2);
  const IndexFunction* prod = nullptr;
  for (const auto& g : poly.functions)
    if (g.params == std::vector<double>{1.0, 1.0}) prod = &g;
  REQUIRE(prod != nullptr);
  Centering c;
  c.model = &model;
  CHECK(closed_form_mean(*prod, model) == doctest::Approx(0.25));
  const double rank_sum = process_value(ps, *prod, c);
  const double integral =
      std::sqrt(150.0) * (integrate(prod->eval, cadlag_copula_measure(ps)) - 0.25);
  CHECK(std::fabs(rank_sum - integral) <= 1e-12);
}

TEST_CASE("closed-form means: step representation against Monte Carlo") {
  const auto model = CopulaModel::marshall_olkin(0.5, 0.5);
  ClassSpec cs;
  cs.kind = ClassKind::step;
  cs.dim = 2;
  cs.res = 4;
  cs.count = 3;
  cs.hk_cap = 3.0;
  cs.seed = 5;
  const IndexClass cls = build_class(cs);
  for (const auto& g : cls.functions) {
    const auto exact = closed_form_mean(g, model);
    REQUIRE(exact.has_value());
    Centering mc;
    mc.model = &model;
    mc.method = Centering::Method::mc;
    mc.mc_n = 200000;
    mc.mc_seed = 77;
    CHECK(std::fabs(*exact - expected_value(g, mc)) < 0.02);
  }
}

TEST_CASE("closed-form means: upper Frechet reductions") {
  const auto m = CopulaModel::frechet_m(2);
  const IndexClass mgf = parse_class_spec("mgf:grid=2", 2);
  for (const auto& g : mgf.functions) {
    const double tsum = g.params[0] + g.params[1];
    const auto e = closed_form_mean(g, m);
    REQUIRE(e.has_value());
    const double expect = tsum == 0.0 ? 1.0 : (std::exp(tsum) - 1.0) / tsum;
    CHECK(*e == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("expected_value: error paths") {
  const auto gauss = CopulaModel::gaussian(0.4);
  const IndexClass mgf = parse_class_spec("mgf:grid=2", 2);
  Centering closed;
  closed.model = &gauss;
  CHECK_THROWS_AS(expected_value(mgf.functions.back(), closed), std::invalid_argument);
  Centering mc;
  mc.model = &gauss;
  mc.method = Centering::Method::mc;
  mc.mc_n = 0;
  CHECK_THROWS_AS(expected_value(mgf.functions.back(), mc), std::invalid_argument);
}

TEST_CASE("t_transform: closed-form check under independence") {
  const auto model = CopulaModel::independence(2);
  const IndexClass poly = parse_class_spec("poly:deg=2", 2);
  const IndexFunction* prod = nullptr;
  for (const auto& g : poly.functions)
    if (g.params == std::vector<double>{1.0, 1.0}) prod = &g;
  REQUIRE(prod != nullptr);
  // E[u2 1{0.3 <= u1}] = 0.7 * 0.5
  const double v =
      t_transform(*prod, 0, model, std::vector<double>{0.3, 0.9}, 200000, 123);
  CHECK(std::fabs(v - 0.35) < 0.005);
  // the indicator event {1 <= U_k} has probability zero
  const double z =
      t_transform(*prod, 0, model, std::vector<double>{1.0, 0.5}, 10000, 456);
  CHECK(z == 0.0);
  // constant members have zero gradient
  const IndexClass mgf = parse_class_spec("mgf:grid=3", 2);
  CHECK(t_transform(mgf.functions.front(), 0, model, std::vector<double>{0.5, 0.5},
                    1000, 7) == 0.0);
  // capability errors
  const IndexClass ind = parse_class_spec("indicator:grid=1", 2);
  CHECK_THROWS_AS(t_transform(ind.functions.front(), 0, model,
                              std::vector<double>{0.5, 0.5}, 1000, 7),
                  std::invalid_argument);
  CHECK_THROWS_AS(t_transform(*prod, 0, model, std::vector<double>{0.5, 0.5}, 0, 7),
                  std::invalid_argument);
}

TEST_CASE("equivalence diagnostic: constants give an identically zero table") {
  const auto model = CopulaModel::independence(2);
  const IndexClass constants = parse_class_spec("poly:deg=0", 2);
  const std::vector<std::size_t> ns{50, 100};
  const auto table = equivalence_diagnostic(model, constants, ns, 5, 99);
  for (const auto& row : table) CHECK(row.median_sup == doctest::Approx(0.0));
}

TEST_CASE("equivalence diagnostic: medians shrink with n") {
  const auto model = CopulaModel::independence(2);
  const IndexClass mgf = parse_class_spec("mgf:grid=3", 2);
  const std::vector<std::size_t> ns{100, 400};
  const auto table = equivalence_diagnostic(model, mgf, ns, 11, 2024);
  REQUIRE(table.size() == 2);
  CHECK(table[0].median_sup > table[1].median_sup);
  // stochastic: different seeds move the medians
  const auto other = equivalence_diagnostic(model, mgf, ns, 11, 2025);
  CHECK(other[0].median_sup != table[0].median_sup);
}

TEST_CASE("equivalence diagnostic: Monte-Carlo fallback runs for smooth models") {
  const auto model = CopulaModel::gaussian(0.3);
  const IndexClass mgf = parse_class_spec("mgf:grid=2", 2);
  const std::vector<std::size_t> ns{60};
  const auto table = equivalence_diagnostic(model, mgf, ns, 3, 5, 2000);
  CHECK(table.size() == 1);
  CHECK(std::isfinite(table[0].median_sup));
}
