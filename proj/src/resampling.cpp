#include "ecp/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ecp/parallel.hpp"

namespace ecp {

std::vector<std::uint32_t> resample_counts(std::uint64_t master_seed,
                                           std::uint64_t replicate_index,
                                           std::size_t n) {
  Rng rng(derive_seed(master_seed, SeedStream::boot_replicate, replicate_index));
  std::vector<std::uint32_t> counts(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[rng.uniform_index(n)];
  return counts;
}

double type1_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("type1_quantile: empty sample");
  if (!(level > 0.0 && level <= 1.0))
    throw std::invalid_argument("type1_quantile: level must lie in (0,1]");
  std::sort(values.begin(), values.end());
  const auto b = values.size();
  auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(b)));
  k = std::clamp<std::size_t>(k, 1, b);
  return values[k - 1];
}

namespace {

// Per-column sort order and the position of each row within it, plus the
// value-block structure needed for tied values.
struct ColumnIndex {
  std::vector<std::uint32_t> order;      // sorted position -> row
  std::vector<std::uint32_t> pos;        // row -> sorted position
  std::vector<std::uint32_t> block_end;  // sorted position -> last position with equal value
};

ColumnIndex build_column_index(const SampleMatrix& s, int j) {
  ColumnIndex ci;
  const std::size_t n = s.n;
  ci.order.resize(n);
  std::iota(ci.order.begin(), ci.order.end(), 0u);
  std::stable_sort(ci.order.begin(), ci.order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return s.at(a, j) < s.at(b, j); });
  ci.pos.resize(n);
  for (std::size_t p = 0; p < n; ++p) ci.pos[ci.order[p]] = static_cast<std::uint32_t>(p);
  ci.block_end.resize(n);
  std::size_t p = 0;
  while (p < n) {
    std::size_t q = p;
    while (q + 1 < n && s.at(ci.order[q + 1], j) == s.at(ci.order[p], j)) ++q;
    for (std::size_t t = p; t <= q; ++t) ci.block_end[t] = static_cast<std::uint32_t>(q);
    p = q + 1;
  }
  return ci;
}

}  // namespace

BootstrapResult bootstrap_replicates(const SampleMatrix& sample, const IndexClass& cls,
                                     std::size_t B, std::uint64_t seed,
                                     std::vector<double> levels) {
  if (B < 1) throw std::invalid_argument("bootstrap_replicates: B must be >= 1");
  if (sample.n < 2) throw std::invalid_argument("bootstrap_replicates: n must be >= 2");
  if (sample.dim != cls.dim)
    throw std::invalid_argument("bootstrap_replicates: dimension mismatch");

  const std::size_t n = sample.n;
  const int d = sample.dim;
  const std::size_t m = cls.functions.size();
  const double nn = static_cast<double>(n);
  const double root_n = std::sqrt(nn);

  const PseudoSample ps = pseudo_observations(sample);
  std::vector<double> orig_means(m, 0.0);
  {
    std::vector<double> vals(m);
    for (std::size_t i = 0; i < n; ++i) {
      eval_all(cls, ps.row(i), vals);
      for (std::size_t g = 0; g < m; ++g) orig_means[g] += vals[g];
    }
    for (double& v : orig_means) v /= nn;
  }

  std::vector<ColumnIndex> cols(d);
  for (int j = 0; j < d; ++j) cols[j] = build_column_index(sample, j);

  BootstrapResult out;
  out.B = B;
  out.master_seed = seed;
  out.seed_rule = std::string(kSeedRule);
  out.statistics.assign(B, 0.0);

  parallel_for(B, [&](std::size_t b) {
    const auto counts = resample_counts(seed, b, n);
    // within-replicate ranks: rank of row i in column j is the count of
    // selected rows with value <= X_ij, obtained from prefix sums over the
    // per-column sort order (value blocks share the upper prefix)
    std::vector<double> rank(n * static_cast<std::size_t>(d));
    std::vector<std::uint64_t> prefix(n);
    for (int j = 0; j < d; ++j) {
      const auto& ci = cols[j];
      std::uint64_t acc = 0;
      for (std::size_t p = 0; p < n; ++p) {
        acc += counts[ci.order[p]];
        prefix[p] = acc;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[i] == 0) continue;
        rank[i * d + j] =
            static_cast<double>(prefix[ci.block_end[ci.pos[i]]]) / nn;
      }
    }
    std::vector<double> sums(m, 0.0), vals(m);
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[i] == 0) continue;
      eval_all(cls, std::span<const double>(rank.data() + i * d, d), vals);
      const double w = static_cast<double>(counts[i]);
      for (std::size_t g = 0; g < m; ++g) sums[g] += w * vals[g];
    }
    double sup = 0.0;
    for (std::size_t g = 0; g < m; ++g)
      sup = std::max(sup, std::fabs(root_n * (sums[g] / nn - orig_means[g])));
    out.statistics[b] = sup;
  });

  for (double level : levels)
    out.quantiles.emplace_back(level, type1_quantile(out.statistics, level));
  return out;
}

GofReport gof_test(const SampleMatrix& sample, const CopulaModel& null_model,
                   const IndexClass& cls, std::size_t B, std::uint64_t seed,
                   std::size_t centering_mc_n) {
  Centering centering;
  centering.model = &null_model;
  centering.method = Centering::Method::closed_form;
  std::vector<double> means;
  bool closed = true;
  try {
    means = class_means(cls, centering);
  } catch (const std::invalid_argument&) {
    closed = false;
    if (centering_mc_n == 0)
      throw std::invalid_argument(
          "gof_test: no closed-form centering for this model/class pair; pass "
          "centering_mc_n >= 1");
    centering.method = Centering::Method::mc;
    centering.mc_n = centering_mc_n;
    centering.mc_seed = derive_seed(seed, SeedStream::centering, 0);
    means = class_means(cls, centering);
  }

  const PseudoSample ps = pseudo_observations(sample);
  const std::size_t m = cls.functions.size();
  const double nn = static_cast<double>(sample.n);
  std::vector<double> sums(m, 0.0), vals(m);
  for (std::size_t i = 0; i < sample.n; ++i) {
    eval_all(cls, ps.row(i), vals);
    for (std::size_t g = 0; g < m; ++g) sums[g] += vals[g];
  }
  double stat = 0.0;
  for (std::size_t g = 0; g < m; ++g)
    stat = std::max(stat, std::fabs(std::sqrt(nn) * (sums[g] / nn - means[g])));

  const BootstrapResult boot =
      bootstrap_replicates(sample, cls, B, derive_seed(seed, SeedStream::boot_trial, 0));
  std::size_t ge = 0;
  for (double s : boot.statistics) ge += s >= stat;

  GofReport rep;
  rep.statistic = stat;
  rep.p_value = static_cast<double>(1 + ge) / static_cast<double>(B + 1);
  rep.B = B;
  rep.class_spec = cls.spec;
  rep.model_spec = null_model.spec();
  rep.n = sample.n;
  rep.seed = seed;
  rep.centering_method = closed ? "closed_form" : "mc";
  rep.centering_mc_n = closed ? 0 : centering_mc_n;
  return rep;
}

std::vector<McStudyRow> mc_study(const CopulaModel& model, std::size_t n,
                                 std::size_t reps, const IndexClass& cls, std::size_t B,
                                 std::uint64_t seed, std::size_t centering_mc_n) {
  if (reps < 1) throw std::invalid_argument("mc_study: reps must be >= 1");
  if (!model.has_sampler()) throw std::invalid_argument("mc_study: model has no sampler");

  Centering centering;
  centering.model = &model;
  centering.method = Centering::Method::closed_form;
  std::vector<double> means;
  try {
    means = class_means(cls, centering);
  } catch (const std::invalid_argument&) {
    if (centering_mc_n == 0)
      throw std::invalid_argument(
          "mc_study: no closed-form centering for this model/class pair; pass "
          "centering_mc_n >= 1");
    centering.method = Centering::Method::mc;
    centering.mc_n = centering_mc_n;
    centering.mc_seed = derive_seed(seed, SeedStream::centering, 0);
    means = class_means(cls, centering);
  }

  const std::vector<double> levels{0.1, 0.5, 0.9};
  const std::size_t m = cls.functions.size();
  std::vector<double> sup_stats(reps);
  std::vector<std::vector<double>> boot_q(levels.size(), std::vector<double>(reps));

  parallel_for(reps, [&](std::size_t r) {
    const SampleMatrix sample =
        model.sample(n, derive_seed(seed, SeedStream::mc_trial, r));
    const PseudoSample ps = pseudo_observations(sample);
    std::vector<double> sums(m, 0.0), vals(m);
    for (std::size_t i = 0; i < n; ++i) {
      eval_all(cls, ps.row(i), vals);
      for (std::size_t g = 0; g < m; ++g) sums[g] += vals[g];
    }
    const double nn = static_cast<double>(n);
    double sup = 0.0;
    for (std::size_t g = 0; g < m; ++g)
      sup = std::max(sup, std::fabs(std::sqrt(nn) * (sums[g] / nn - means[g])));
    sup_stats[r] = sup;

    const BootstrapResult boot = bootstrap_replicates(
        sample, cls, B, derive_seed(seed, SeedStream::boot_trial, r),
        std::vector<double>(levels));
    for (std::size_t l = 0; l < levels.size(); ++l)
      boot_q[l][r] = boot.quantiles[l].second;
  });

  std::vector<McStudyRow> table;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    McStudyRow row;
    row.level = levels[l];
    row.mc_quantile = type1_quantile(sup_stats, levels[l]);
    row.boot_quantile = type1_quantile(boot_q[l], 0.5);
    row.rel_diff = std::fabs(row.boot_quantile - row.mc_quantile) /
                   (row.mc_quantile == 0.0 ? 1.0 : row.mc_quantile);
    table.push_back(row);
  }
  return table;
}

}  // namespace ecp
