#include "ecp/empirical_process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ecp/parallel.hpp"

namespace ecp {

namespace {

// (e^t - 1)/t, continuous at 0
double mexp(double t) { return t == 0.0 ? 1.0 : std::expm1(t) / t; }

std::vector<double> sorted_column(const SampleMatrix& s, int j) {
  std::vector<double> col(s.n);
  for (std::size_t i = 0; i < s.n; ++i) col[i] = s.at(i, j);
  std::sort(col.begin(), col.end());
  return col;
}

}  // namespace

PseudoSample pseudo_observations(const SampleMatrix& sample) {
  if (sample.n < 1) throw std::invalid_argument("pseudo_observations: empty sample");
  PseudoSample ps;
  ps.n = sample.n;
  ps.dim = sample.dim;
  ps.ranks.resize(sample.values.size());
  const double n = static_cast<double>(sample.n);
  for (int j = 0; j < sample.dim; ++j) {
    const auto col = sorted_column(sample, j);
    for (std::size_t i = 0; i < sample.n; ++i) {
      const auto le =
          std::upper_bound(col.begin(), col.end(), sample.at(i, j)) - col.begin();
      ps.ranks[i * sample.dim + j] = static_cast<double>(le) / n;
    }
  }
  return ps;
}

EmpiricalCopulaValue empirical_copulas(const PseudoSample& ps,
                                       std::span<const double> u) {
  if (static_cast<int>(u.size()) != ps.dim)
    throw std::invalid_argument("empirical_copulas: dimension mismatch");
  for (double v : u)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("empirical_copulas: point outside [0,1]^d");

  const double n = static_cast<double>(ps.n);
  // smallest k with k/n >= u_j: the grid value of the generalized inverse
  std::vector<double> ceil_u(ps.dim);
  for (int j = 0; j < ps.dim; ++j) {
    auto k = static_cast<long>(std::ceil(u[j] * n));
    k = std::clamp<long>(k, 0, static_cast<long>(ps.n));
    while (k > 0 && static_cast<double>(k - 1) / n >= u[j]) --k;
    while (k < static_cast<long>(ps.n) && static_cast<double>(k) / n < u[j]) ++k;
    ceil_u[j] = static_cast<double>(k) / n;
  }

  std::size_t count_cadlag = 0, count_inverse = 0;
  for (std::size_t i = 0; i < ps.n; ++i) {
    bool le_u = true, le_ceil = true;
    for (int j = 0; j < ps.dim; ++j) {
      const double r = ps.at(i, j);
      le_u = le_u && r <= u[j];
      le_ceil = le_ceil && r <= ceil_u[j];
      if (!le_u && !le_ceil) break;
    }
    count_cadlag += le_u;
    count_inverse += le_ceil;
  }
  EmpiricalCopulaValue out;
  out.cadlag = static_cast<double>(count_cadlag) / n;
  out.inverse = static_cast<double>(count_inverse) / n;
  return out;
}

SignedMeasure cadlag_copula_measure(const PseudoSample& ps) {
  SignedMeasure mu;
  mu.dim = ps.dim;
  mu.atoms.reserve(ps.n);
  const double w = 1.0 / static_cast<double>(ps.n);
  for (std::size_t i = 0; i < ps.n; ++i) {
    SignedMeasure::Atom a;
    a.loc.assign(ps.row(i).begin(), ps.row(i).end());
    a.weight = w;
    mu.atoms.push_back(std::move(a));
  }
  return mu;
}

std::optional<double> closed_form_mean(const IndexFunction& g, const CopulaModel& model) {
  if (g.dim != model.dim()) return std::nullopt;
  if (g.has_box_measure()) {
    // exact: sum over grid cells of value * copula measure of the cell
    const GridStepFunction& gsf = *g.box_measure;
    const auto& breaks = gsf.axis_breaks();
    const int d = gsf.dim();
    const PointFn cdf = model.cdf_fn();
    std::vector<std::size_t> idx(d, 0);
    double e = 0.0;
    for (std::size_t flat = 0; flat < gsf.cell_count(); ++flat) {
      std::vector<double> lo(d), hi(d);
      for (int j = 0; j < d; ++j) {
        lo[j] = breaks[j][idx[j]];
        hi[j] = idx[j] + 1 < breaks[j].size() ? breaks[j][idx[j] + 1] : 1.0;
      }
      const double v = gsf.cell_values()[flat];
      if (v != 0.0) e += v * generalized_volume(cdf, Box(lo, hi));
      for (int j = d - 1; j >= 0; --j) {
        if (++idx[j] < breaks[j].size()) break;
        idx[j] = 0;
      }
    }
    return e;
  }
  if (g.kind == ClassKind::mgf) {
    if (model.family() == CopulaModel::Family::independence) {
      double e = 1.0;
      for (double t : g.params) e *= mexp(t);
      return e;
    }
    if (model.family() == CopulaModel::Family::frechet_m) {
      double tsum = 0.0;
      for (double t : g.params) tsum += t;
      return mexp(tsum);
    }
  }
  if (g.kind == ClassKind::polynomial) {
    if (model.family() == CopulaModel::Family::independence) {
      double e = 1.0;
      for (double a : g.params) e /= a + 1.0;
      return e;
    }
    if (model.family() == CopulaModel::Family::frechet_m) {
      double asum = 0.0;
      for (double a : g.params) asum += a;
      return 1.0 / (asum + 1.0);
    }
  }
  return std::nullopt;
}

double expected_value(const IndexFunction& g, const Centering& centering) {
  if (centering.model == nullptr)
    throw std::invalid_argument("expected_value: missing centering model");
  if (centering.method == Centering::Method::closed_form) {
    const auto e = closed_form_mean(g, *centering.model);
    if (!e)
      throw std::invalid_argument("expected_value: no closed form for '" + g.id +
                                  "' under " + centering.model->spec() +
                                  "; use mc centering");
    return *e;
  }
  if (centering.mc_n == 0)
    throw std::invalid_argument("expected_value: mc centering requires N >= 1");
  const SampleMatrix u = centering.model->sample(centering.mc_n, centering.mc_seed);
  double s = 0.0;
  for (std::size_t i = 0; i < u.n; ++i) s += g.eval(u.row(i));
  return s / static_cast<double>(u.n);
}

std::vector<double> class_means(const IndexClass& cls, const Centering& centering) {
  std::vector<double> means(cls.functions.size());
  if (centering.method == Centering::Method::mc) {
    if (centering.model == nullptr)
      throw std::invalid_argument("class_means: missing centering model");
    if (centering.mc_n == 0)
      throw std::invalid_argument("class_means: mc centering requires N >= 1");
    const SampleMatrix u = centering.model->sample(centering.mc_n, centering.mc_seed);
    std::vector<double> vals(cls.functions.size());
    std::vector<double> sums(cls.functions.size(), 0.0);
    for (std::size_t i = 0; i < u.n; ++i) {
      eval_all(cls, u.row(i), vals);
      for (std::size_t m = 0; m < sums.size(); ++m) sums[m] += vals[m];
    }
    for (std::size_t m = 0; m < sums.size(); ++m)
      means[m] = sums[m] / static_cast<double>(u.n);
    return means;
  }
  for (std::size_t m = 0; m < cls.functions.size(); ++m)
    means[m] = expected_value(cls.functions[m], centering);
  return means;
}

double process_value(const PseudoSample& ps, const IndexFunction& g,
                     const Centering& centering) {
  const double e = expected_value(g, centering);
  double s = 0.0;
  for (std::size_t i = 0; i < ps.n; ++i) s += g.eval(ps.row(i));
  const double n = static_cast<double>(ps.n);
  return std::sqrt(n) * (s / n - e);
}

ProcessEvaluation evaluate_process(const PseudoSample& ps, const IndexClass& cls,
                                   const Centering& centering) {
  ProcessEvaluation out;
  out.n = ps.n;
  out.centering_method =
      centering.method == Centering::Method::closed_form ? "closed_form" : "mc";
  out.centering_mc_n = centering.method == Centering::Method::mc ? centering.mc_n : 0;
  out.centering_mc_seed =
      centering.method == Centering::Method::mc ? centering.mc_seed : 0;
  const auto means = class_means(cls, centering);
  std::vector<double> sums(cls.functions.size(), 0.0);
  std::vector<double> vals(cls.functions.size());
  for (std::size_t i = 0; i < ps.n; ++i) {
    eval_all(cls, ps.row(i), vals);
    for (std::size_t m = 0; m < sums.size(); ++m) sums[m] += vals[m];
  }
  const double n = static_cast<double>(ps.n);
  out.ids.reserve(cls.functions.size());
  out.values.reserve(cls.functions.size());
  for (std::size_t m = 0; m < cls.functions.size(); ++m) {
    out.ids.push_back(cls.functions[m].id);
    out.values.push_back(std::sqrt(n) * (sums[m] / n - means[m]));
  }
  return out;
}

double t_transform(const IndexFunction& g, int k, const CopulaModel& model,
                   std::span<const double> x, std::size_t mc_n, std::uint64_t seed) {
  if (!g.has_gradient())
    throw std::invalid_argument("t_transform: '" + g.id + "' exposes no gradient");
  if (mc_n == 0) throw std::invalid_argument("t_transform: N must be >= 1");
  if (k < 0 || k >= g.dim) throw std::invalid_argument("t_transform: bad coordinate");
  const SampleMatrix u = model.sample(mc_n, seed);
  double s = 0.0;
  for (std::size_t i = 0; i < u.n; ++i)
    if (x[k] <= u.at(i, k)) s += g.gradient(u.row(i), k);
  return s / static_cast<double>(mc_n);
}

namespace {

// sqrt(n) (F_nk - id) evaluated from a sorted column
double marginal_process(const std::vector<double>& sorted_col, double x) {
  const double n = static_cast<double>(sorted_col.size());
  const auto le = std::upper_bound(sorted_col.begin(), sorted_col.end(), x) -
                  sorted_col.begin();
  return std::sqrt(n) * (static_cast<double>(le) / n - x);
}

// One replication of the diagnostic; returns sup_g |Zbar(g) - Ztilde(g)|.
double diagnostic_rep(const CopulaModel& model, const IndexClass& cls, std::size_t n,
                      std::uint64_t sample_seed, std::uint64_t mc_seed,
                      std::size_t tk_mc_n, const std::vector<double>& means) {
  const SampleMatrix sample = model.sample(n, sample_seed);
  const PseudoSample ps = pseudo_observations(sample);
  const double nn = static_cast<double>(n);
  const double root_n = std::sqrt(nn);
  const std::size_t m = cls.functions.size();

  std::vector<double> rank_sums(m, 0.0), raw_sums(m, 0.0), vals(m);
  for (std::size_t i = 0; i < n; ++i) {
    eval_all(cls, ps.row(i), vals);
    for (std::size_t g = 0; g < m; ++g) rank_sums[g] += vals[g];
    eval_all(cls, sample.row(i), vals);
    for (std::size_t g = 0; g < m; ++g) raw_sums[g] += vals[g];
  }

  std::vector<std::vector<double>> cols(cls.dim);
  for (int j = 0; j < cls.dim; ++j) cols[j] = sorted_column(sample, j);

  // smoothing integrals per (g, k): int dg_k(x) U_nk(x_k) dC(x)
  std::vector<double> smooth(m, 0.0);
  const bool exact = model.family() == CopulaModel::Family::independence &&
                     cls.kind == ClassKind::mgf;
  if (exact) {
    for (std::size_t g = 0; g < m; ++g) {
      const auto& t = cls.functions[g].params;
      for (int k = 0; k < cls.dim; ++k) {
        if (t[k] == 0.0) continue;
        double outer = t[k];
        for (int j = 0; j < cls.dim; ++j)
          if (j != k) outer *= mexp(t[j]);
        // int_0^1 U_nk(s) e^{t s} ds, atom by atom
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double a = sample.at(i, k);
          acc += t[k] == 0.0 ? (1.0 - a) : (std::exp(t[k]) - std::exp(t[k] * a)) / t[k];
        }
        const double b = (std::exp(t[k]) * (t[k] - 1.0) + 1.0) / (t[k] * t[k]);
        smooth[g] += outer * root_n * (acc / nn - b);
      }
    }
  } else {
    const SampleMatrix pool = model.sample(tk_mc_n, mc_seed);
    std::vector<double> unk(tk_mc_n);
    for (int k = 0; k < cls.dim; ++k) {
      for (std::size_t i = 0; i < pool.n; ++i)
        unk[i] = marginal_process(cols[k], pool.at(i, k));
      for (std::size_t g = 0; g < m; ++g) {
        if (!cls.functions[g].has_gradient())
          throw std::invalid_argument("equivalence_diagnostic: '" +
                                      cls.functions[g].id + "' exposes no gradient");
        double acc = 0.0;
        for (std::size_t i = 0; i < pool.n; ++i)
          acc += cls.functions[g].gradient(pool.row(i), k) * unk[i];
        smooth[g] += acc / static_cast<double>(pool.n);
      }
    }
  }

  double sup = 0.0;
  for (std::size_t g = 0; g < m; ++g) {
    const double zbar = root_n * (rank_sums[g] / nn - means[g]);
    const double ztilde = root_n * (raw_sums[g] / nn - means[g]) + smooth[g];
    sup = std::max(sup, std::fabs(zbar - ztilde));
  }
  return sup;
}

}  // namespace

std::vector<DiagnosticRow> equivalence_diagnostic(const CopulaModel& model,
                                                  const IndexClass& cls,
                                                  std::span<const std::size_t> n_values,
                                                  std::size_t reps, std::uint64_t seed,
                                                  std::size_t tk_mc_n) {
  if (!model.has_sampler())
    throw std::invalid_argument("equivalence_diagnostic: model has no sampler");
  if (reps < 1) throw std::invalid_argument("equivalence_diagnostic: reps must be >= 1");
  for (const auto& g : cls.functions)
    if (!g.has_gradient() && !(model.family() == CopulaModel::Family::independence &&
                               cls.kind == ClassKind::mgf))
      throw std::invalid_argument("equivalence_diagnostic: '" + g.id +
                                  "' exposes no gradient");

  Centering centering;
  centering.model = &model;
  centering.method = Centering::Method::closed_form;
  std::vector<double> means;
  try {
    means = class_means(cls, centering);
  } catch (const std::invalid_argument&) {
    centering.method = Centering::Method::mc;
    centering.mc_n = std::max<std::size_t>(tk_mc_n, 10000);
    centering.mc_seed = derive_seed(seed, SeedStream::centering, 0);
    means = class_means(cls, centering);
  }

  std::vector<DiagnosticRow> table;
  for (std::size_t t = 0; t < n_values.size(); ++t) {
    const std::size_t n = n_values[t];
    std::vector<double> sups(reps);
    parallel_for(reps, [&](std::size_t r) {
      const std::uint64_t index = t * reps + r;
      sups[r] = diagnostic_rep(model, cls, n,
                               derive_seed(seed, SeedStream::diag_rep, index),
                               derive_seed(seed, SeedStream::tk_mc, index), tk_mc_n,
                               means);
    });
    std::sort(sups.begin(), sups.end());
    const std::size_t at = (reps + 1) / 2;  // ceil(reps/2), 1-based
    table.push_back({n, sups[at - 1]});
  }
  return table;
}

}  // namespace ecp
