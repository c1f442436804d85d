#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecp/copula_models.hpp"
#include "ecp/index_classes.hpp"

namespace ecp {

/// Normalized ranks: rank_ij = #{k : X_kj <= X_ij} / n. Each entry is a
/// multiple of 1/n in {1/n,...,1}; tie-free columns are permutations of that
/// set. Invariant under strictly increasing coordinatewise transforms.
struct PseudoSample {
  std::size_t n = 0;
  int dim = 0;
  std::vector<double> ranks;  // row-major

  double at(std::size_t i, int j) const {
    return ranks[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)];
  }
  std::span<const double> row(std::size_t i) const {
    return {ranks.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

PseudoSample pseudo_observations(const SampleMatrix& sample);

struct EmpiricalCopulaValue {
  double cadlag = 0.0;   // proportion of rank vectors <= u
  double inverse = 0.0;  // empirical cdf at the marginal generalized inverses
};

EmpiricalCopulaValue empirical_copulas(const PseudoSample& ps,
                                       std::span<const double> u);

/// The atomic measure of the cadlag empirical copula: mass 1/n at each rank
/// vector.
SignedMeasure cadlag_copula_measure(const PseudoSample& ps);

/// How E[g(U)] under the reference copula is obtained.
struct Centering {
  const CopulaModel* model = nullptr;
  enum class Method { closed_form, mc } method = Method::closed_form;
  std::size_t mc_n = 0;
  std::uint64_t mc_seed = 0;
};

/// Closed-form E[g(U)] where the (model, function) pair admits one:
/// any cdf-model for step-represented g (exact cell sums), independence and
/// the upper Frechet bound for mgf/polynomial members.
std::optional<double> closed_form_mean(const IndexFunction& g, const CopulaModel& model);

/// E[g(U)] per the centering method; throws if closed_form is requested but
/// unavailable, or if mc is requested with mc_n == 0.
double expected_value(const IndexFunction& g, const Centering& centering);

/// E[g(U)] for every class member. Monte-Carlo centering draws one shared
/// sample of size mc_n from the model (seed mc_seed).
std::vector<double> class_means(const IndexClass& cls, const Centering& centering);

/// The function-indexed process value: sqrt(n) * (mean of g over the rank
/// rows minus E[g]).
double process_value(const PseudoSample& ps, const IndexFunction& g,
                     const Centering& centering);

struct ProcessEvaluation {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t n = 0;
  std::string centering_method;
  std::size_t centering_mc_n = 0;
  std::uint64_t centering_mc_seed = 0;
};

ProcessEvaluation evaluate_process(const PseudoSample& ps, const IndexClass& cls,
                                   const Centering& centering);

/// Monte Carlo estimate of the smoothing transform
///   (1/N) sum_m dg_k(U_m) 1{x_k <= U_mk},  U_m drawn from the model.
/// Requires the gradient capability and N >= 1.
double t_transform(const IndexFunction& g, int k, const CopulaModel& model,
                   std::span<const double> x, std::size_t mc_n, std::uint64_t seed);

struct DiagnosticRow {
  std::size_t n = 0;
  double median_sup = 0.0;
};

/// Desk-scale check that the rank process and its rank-free linearization
/// agree: for each n, simulates `reps` samples from the model and reports the
/// median over reps of sup_g |Zbar_n(g) - Ztilde_n(g)|, where Ztilde uses the
/// raw (pre-rank) sample. Exact centering and smoothing integrals are used
/// for the independence x mgf pair; other pairs fall back to Monte Carlo with
/// tk_mc_n draws per replication.
std::vector<DiagnosticRow> equivalence_diagnostic(const CopulaModel& model,
                                                  const IndexClass& cls,
                                                  std::span<const std::size_t> n_values,
                                                  std::size_t reps, std::uint64_t seed,
                                                  std::size_t tk_mc_n = 4000);

}  // namespace ecp
