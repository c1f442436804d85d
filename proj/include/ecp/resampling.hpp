#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecp/empirical_process.hpp"

namespace ecp {

/// Multiplicity of each original row in replicate `replicate_index`:
/// n draws with replacement, generator seeded by
/// derive_seed(master_seed, SeedStream::boot_replicate, replicate_index).
std::vector<std::uint32_t> resample_counts(std::uint64_t master_seed,
                                           std::uint64_t replicate_index,
                                           std::size_t n);

/// Order statistic at ceil(level * B) (type 1), on a sorted copy.
double type1_quantile(std::vector<double> values, double level);

struct BootstrapResult {
  std::size_t B = 0;
  std::vector<double> statistics;                  // by replicate index
  std::vector<std::pair<double, double>> quantiles;  // (level, value)
  std::uint64_t master_seed = 0;
  std::string seed_rule;
};

/// For each replicate: draw n rows with replacement, re-rank within the
/// replicate, and compute the sup over the class of
/// |sqrt(n) (mean g(ranks*) - mean g(ranks))|; the centering at the original
/// rank statistic needs no model.
BootstrapResult bootstrap_replicates(const SampleMatrix& sample, const IndexClass& cls,
                                     std::size_t B, std::uint64_t seed,
                                     std::vector<double> levels = {0.1, 0.5, 0.9});

struct GofReport {
  double statistic = 0.0;
  double p_value = 1.0;  // (1 + #{b : stat*_b >= statistic}) / (B + 1)
  std::size_t B = 0;
  std::string class_spec;
  std::string model_spec;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string centering_method;
  std::size_t centering_mc_n = 0;
};

/// Sup statistic of the process centered at the null copula, with the add-one
/// bootstrap p-value. Closed-form centering where available, otherwise Monte
/// Carlo with centering_mc_n draws.
GofReport gof_test(const SampleMatrix& sample, const CopulaModel& null_model,
                   const IndexClass& cls, std::size_t B, std::uint64_t seed,
                   std::size_t centering_mc_n = 0);

struct McStudyRow {
  double level = 0.0;
  double mc_quantile = 0.0;
  double boot_quantile = 0.0;  // median over trials of per-trial bootstrap quantiles
  double rel_diff = 0.0;
};

/// Desk-scale bootstrap validation: Monte-Carlo quantiles of sup_g |Z_n(g)|
/// over `reps` fresh samples against the median-over-trials bootstrap
/// quantiles (one bootstrap of B replicates per trial), at the 10/50/90%
/// levels.
std::vector<McStudyRow> mc_study(const CopulaModel& model, std::size_t n,
                                 std::size_t reps, const IndexClass& cls, std::size_t B,
                                 std::uint64_t seed, std::size_t centering_mc_n = 0);

}  // namespace ecp
