#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ecp/bv_core.hpp"

namespace ecp {

/// n rows of d-dimensional observations, row-major.
struct SampleMatrix {
  std::size_t n = 0;
  int dim = 0;
  std::vector<double> values;

  double at(std::size_t i, int j) const {
    return values[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)];
  }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

enum class DeltaForm { min_form, inf_form };

/// Copula evaluator plus (for most families) an exact sampler.
class CopulaModel {
 public:
  enum class Family {
    independence,
    frechet_m,
    frechet_w,
    marshall_olkin,
    cuadras_auge,
    gaussian,
    delta,
  };

  static CopulaModel independence(int dim);
  static CopulaModel frechet_m(int dim = 2);
  static CopulaModel frechet_w();  // the lower bound is a copula only for d=2
  static CopulaModel marshall_olkin(double alpha, double beta);
  static CopulaModel cuadras_auge(double theta);  // Marshall-Olkin with alpha=beta=theta
  static CopulaModel gaussian(double rho);
  /// Diagonal constructions from a user-supplied delta: [0,1] -> [0,1].
  /// Evaluator-only; no admissibility check is performed, an invalid delta
  /// may yield a non-copula. The inf form evaluates the infimum on a fixed
  /// mesh (plus the interval endpoints).
  static CopulaModel delta_construction(std::function<double(double)> delta,
                                        DeltaForm form, double mesh = 1e-4);

  int dim() const { return dim_; }
  Family family() const { return family_; }
  const std::string& spec() const { return spec_; }

  double cdf(std::span<const double> u) const;
  PointFn cdf_fn() const;

  bool has_sampler() const { return family_ != Family::delta; }

  /// n i.i.d. rows with joint cdf equal to cdf(); deterministic given seed.
  SampleMatrix sample(std::size_t n, std::uint64_t seed) const;

  /// Stationary dependent sequence: a latent Gaussian AR(1) chain with
  /// autoregression coefficient mixing_rho and cross-sectional correlation
  /// rho, pushed through the standard normal cdf. Rows are identically
  /// distributed with this (gaussian) copula. Requires the gaussian family.
  SampleMatrix sample_stationary(double mixing_rho, std::size_t n,
                                 std::uint64_t seed) const;

  double alpha() const { return a_; }
  double beta() const { return b_; }
  double rho() const { return rho_; }

 private:
  CopulaModel() = default;

  Family family_ = Family::independence;
  int dim_ = 2;
  double a_ = 0.0;  // Marshall-Olkin alpha
  double b_ = 0.0;  // Marshall-Olkin beta
  double rho_ = 0.0;
  std::function<double(double)> delta_;
  DeltaForm delta_form_ = DeltaForm::min_form;
  double delta_mesh_ = 1e-4;
  std::string spec_;
};

/// Parses model spec strings such as "indep:d=3", "m", "w",
/// "mo:alpha=0.5,beta=0.5", "ca:theta=0.3", "gauss:rho=0.4".
CopulaModel parse_model_spec(const std::string& spec);

}  // namespace ecp
