#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ecp/rng.hpp"

namespace ecp {

/// Point-evaluable real function on [0,1]^d.
using PointFn = std::function<double(std::span<const double>)>;

/// Half-open box (lower, upper]. Degenerate boxes (lower_j == upper_j) are
/// allowed and carry no measure.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  Box(std::vector<double> lo, std::vector<double> up);
  int dim() const { return static_cast<int>(lower.size()); }
};

Box unit_box(int dim);

/// Subset of coordinate axes {0,...,d-1} as a bitmask.
class IndexSet {
 public:
  IndexSet(int dim, std::uint32_t bits);
  static IndexSet empty(int dim) { return IndexSet(dim, 0); }
  static IndexSet full(int dim);

  int dim() const { return dim_; }
  std::uint32_t bits() const { return bits_; }
  bool contains(int axis) const { return (bits_ >> axis) & 1u; }
  int count() const;
  IndexSet complement() const;

 private:
  int dim_;
  std::uint32_t bits_;
};

/// Per-axis cut points, strictly increasing, contained in the open interval
/// (0,1). The successor of a cut is the next cut on that axis, or 1.
struct Ladder {
  std::vector<std::vector<double>> cuts;
};

Ladder dyadic_ladder(int dim, int depth);

/// Right-continuous piecewise-constant function on [0,1]^d. Axis breakpoints
/// live in [0,1) with 0 always present; the function is constant on each
/// half-open grid cell [break, next_break) per axis, and the value at points
/// with a coordinate equal to 1 is the value of the last cell. Breakpoints
/// are the single source of truth for jump locations: they are compared with
/// exact equality, never with a floating tolerance.
class GridStepFunction {
 public:
  GridStepFunction(std::vector<std::vector<double>> axis_breaks,
                   std::vector<double> cell_values);

  int dim() const { return static_cast<int>(breaks_.size()); }
  const std::vector<std::vector<double>>& axis_breaks() const { return breaks_; }
  const std::vector<double>& cell_values() const { return values_; }
  std::size_t cell_count() const { return values_.size(); }

  double value(std::span<const double> x) const;

  /// Left limit in the coordinates of `left`: on those axes the value of the
  /// cell immediately below x_j when x_j is exactly a breakpoint, the cell of
  /// x_j otherwise; at x_j == 0 the left limit is the value at 0.
  double value_left(std::span<const double> x, const IndexSet& left) const;

  PointFn as_fn() const;

 private:
  std::vector<std::vector<double>> breaks_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;

  std::size_t cell_of(int axis, double x) const;
  friend GridStepFunction slice(const GridStepFunction&, const IndexSet&,
                                std::span<const double>);
};

/// Finite atomic signed measure on [0,1]^d.
struct SignedMeasure {
  struct Atom {
    std::vector<double> loc;
    double weight;
  };

  int dim = 0;
  std::vector<Atom> atoms;

  double total_variation() const;
  /// Sum of weights of atoms in the closed box [0, x].
  double cdf(std::span<const double> x) const;
  /// Keeps atoms with location in (box.lower, box.upper] (strict on lower,
  /// inclusive on upper).
  SignedMeasure restricted_to(const Box& box) const;
};

/// Inclusion-exclusion corner sum: the weight the measure induced by f
/// assigns to the half-open box (lower, upper].
double generalized_volume(const PointFn& f, const Box& box);
double generalized_volume(const GridStepFunction& f, const Box& box);

/// Weight assigned to the |I|-dimensional half-open box (lower_I, upper_I]
/// by the projection of f with the -I coordinates frozen at `corner`.
/// `lower_I`/`upper_I` list coordinates for the axes of I in ascending axis
/// order; `corner` has full length d and is read only off I (entries 0 or 1).
/// I must be nonempty.
double projection_measure_weight(const PointFn& f, int dim, const IndexSet& I,
                                 std::span<const double> lower_I,
                                 std::span<const double> upper_I,
                                 std::span<const double> corner);

/// Lower-dimensional restriction of a step function: keeps the axes in
/// `keep`, freezing the remaining coordinates at `frozen` (full length d).
GridStepFunction slice(const GridStepFunction& f, const IndexSet& keep,
                       std::span<const double> frozen);

/// Variation of f over the cells (y, y+] of a multivariate ladder.
double ladder_variation_sum(const PointFn& f, int dim, const Ladder& ladder);

/// Variation of f over the full dyadic partition of (0,1]^d at given depth:
/// cells (k/2^m, (k+1)/2^m] per axis, including the cells open at the lower
/// edge. Equals the limit of ladder sums for the ladders {eps} u {k/2^m} as
/// eps -> 0, so it never exceeds the Vitali variation, and refinement is
/// monotone nondecreasing.
double dyadic_partition_sum(const PointFn& f, int dim, int depth);

struct RefineOptions {
  double tol = 1e-3;
  int max_depth = 12;
  /// Per-depth corner-lattice budget, (2^m + 1)^d evaluations.
  std::size_t max_corner_evals = std::size_t(1) << 26;
};

struct VariationResult {
  double value = 0.0;
  bool converged = false;
  int depth = 0;
  double last_change = 0.0;
};

/// Exact Vitali variation of a step function: total variation of its atomic
/// measure on (0,1]^d (atoms on the lower boundary are outside every ladder
/// cell and do not contribute).
double vitali_variation(const GridStepFunction& f);

/// Dyadic-refinement approximation for point-evaluable f; stops when two
/// successive depths differ by less than tol. Non-convergence is flagged,
/// never silent.
VariationResult vitali_variation(const PointFn& f, int dim,
                                 const RefineOptions& opts);

/// Hardy-Krause variation: sum over all subsets I of the Vitali variation of
/// the projection anchored at 1 off I. The I = {} term is |f(1,...,1)|.
double hk_variation(const GridStepFunction& f);
VariationResult hk_variation(const PointFn& f, int dim, const RefineOptions& opts);

/// The unique atomic measure with cdf equal to f at every grid corner and at
/// the point (1,...,1). Includes the atom at the lower corner when f is
/// nonzero there.
SignedMeasure as_measure(const GridStepFunction& f);

/// Seeded random step function on the uniform res-grid per axis, cell values
/// uniform on [-1,1].
GridStepFunction random_step_function(Rng& rng, int dim, int res);

/// Seeded random step function with general-position breakpoints (between 1
/// and max_breaks per axis, the first always 0).
GridStepFunction random_step_function_jittered(Rng& rng, int dim, int max_breaks);

}  // namespace ecp
