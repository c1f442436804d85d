#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecp/bv_core.hpp"

namespace ecp {

enum class ClassKind { indicator, mgf, polynomial, step };

/// An indexing function g with its capability set. `params` carries the
/// family parameters (the corner u, the exponent vector t, the monomial
/// exponents); step members have none.
struct IndexFunction {
  std::string id;
  int dim = 0;
  ClassKind kind = ClassKind::step;
  std::vector<double> params;
  double hk_bound = 0.0;

  PointFn eval;
  std::function<double(std::span<const double>, int)> gradient;  // d/dx_k
  std::shared_ptr<const GridStepFunction> box_measure;

  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool has_box_measure() const { return box_measure != nullptr; }
};

struct IndexClass {
  ClassKind kind = ClassKind::step;
  int dim = 0;
  std::string spec;
  std::vector<IndexFunction> functions;

  // mgf fast path: per-axis distinct exponents and per-member indices
  std::vector<std::vector<double>> mgf_axis_t;
  std::vector<std::vector<int>> mgf_member_idx;
};

struct ClassSpec {
  ClassKind kind = ClassKind::mgf;
  int dim = 2;
  int grid = 0;          // indicator, mgf
  int degree = 0;        // polynomial: max total degree
  int res = 0;           // step: uniform grid resolution
  int count = 0;         // step: member count
  double hk_cap = 0.0;   // step: T
  std::uint64_t seed = 0;
};

IndexClass build_class(const ClassSpec& spec);

/// Parses "indicator:grid=5", "mgf:grid=3", "poly:deg=2",
/// "step:res=8,count=20,T=5,seed=7".
IndexClass parse_class_spec(const std::string& spec, int dim);

/// Evaluates every member at x. Uses the factorized exponential path for mgf
/// classes (agrees with member-wise evaluation to rounding).
void eval_all(const IndexClass& cls, std::span<const double> x, std::span<double> out);

/// Max over members of the Hardy-Krause variation (exact where a step
/// representation exists, dyadic refinement otherwise): the class constant T.
VariationResult class_hk_bound(const IndexClass& cls, const RefineOptions& opts = {});

}  // namespace ecp
