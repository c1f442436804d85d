#pragma once

#include <cstdint>
#include <vector>

#include "ecp/bv_core.hpp"

namespace ecp {

/// Integral of f against a finite atomic measure: sum of f(loc) * weight.
double integrate(const PointFn& f, const SignedMeasure& mu);
double integrate(const GridStepFunction& f, const SignedMeasure& mu);

enum class IbpMode { general, vanishing_faces };

/// One partition term of the integration-by-parts expansion. i1/i2/i3 are
/// bitmasks partitioning the axes; `value` carries the sign (-1)^(|i1|+|i2|).
struct IbpTerm {
  std::uint32_t i1 = 0;
  std::uint32_t i2 = 0;
  std::uint32_t i3 = 0;
  double value = 0.0;
};

/// Expansion of the Stieltjes integral of f against the measure of g over the
/// half-open box: the sum over partitions I1+I2+I3 of the axes of
///
///   (-1)^(|I1|+|I2|)  *  integral over (lower_I1, upper_I1] of
///        g(x_I1-; lower_I2 : upper_I3)  d f(x_I1; lower_I2 : upper_I3),
///
/// where the I1 = {} term degenerates to the corner product (f*g)(corner).
/// Inner integrals enumerate the atoms of f's projected measure exactly; no
/// quadrature is involved. Terms are emitted in binary-counting order of
/// (i1, i2) so logs and reductions are reproducible.
///
/// vanishing_faces keeps only the I2 = {} terms, which requires (checked)
/// that g vanishes on every lower face of the box; 2^d terms instead of 3^d.
///
/// `left_limits=false` replaces g(x_I1-) by g(x_I1); the two agree whenever f
/// and g share no jump locations inside the box.
std::vector<IbpTerm> ibp_terms(const GridStepFunction& f, const GridStepFunction& g,
                               const Box& box, IbpMode mode, bool left_limits = true);

double ibp_rhs(const GridStepFunction& f, const GridStepFunction& g, const Box& box,
               IbpMode mode);

struct IbpReport {
  double lhs = 0.0;
  double rhs = 0.0;
  int term_count = 0;
  double max_term_magnitude = 0.0;
  double abs_diff = 0.0;
};

/// lhs = integral of f against the measure of g restricted to the box,
/// rhs = partition-sum expansion; abs_diff = |lhs - rhs|.
IbpReport ibp_check(const GridStepFunction& f, const GridStepFunction& g,
                    const Box& box, IbpMode mode);

}  // namespace ecp
