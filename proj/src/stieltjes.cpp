#include "ecp/stieltjes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ecp {

double integrate(const PointFn& f, const SignedMeasure& mu) {
  double s = 0.0;
  for (const auto& a : mu.atoms) {
    if (static_cast<int>(a.loc.size()) != mu.dim)
      throw std::invalid_argument("integrate: atom dimension mismatch");
    s += f(a.loc) * a.weight;
  }
  return s;
}

double integrate(const GridStepFunction& f, const SignedMeasure& mu) {
  if (f.dim() != mu.dim)
    throw std::invalid_argument("integrate: dimension mismatch");
  return integrate(f.as_fn(), mu);
}

namespace {

// Representative coordinates of the cells of g meeting [lo, hi] on one axis.
std::vector<double> face_reps(const std::vector<double>& breaks, double lo, double hi) {
  std::vector<double> reps{lo};
  for (double b : breaks)
    if (lo < b && b < hi) reps.push_back(b);
  if (hi > lo) reps.push_back(hi);
  return reps;
}

void check_vanishing_faces(const GridStepFunction& g, const Box& box) {
  const int d = g.dim();
  for (int j = 0; j < d; ++j) {
    std::vector<std::vector<double>> reps(d);
    for (int k = 0; k < d; ++k)
      reps[k] = (k == j) ? std::vector<double>{box.lower[j]}
                         : face_reps(g.axis_breaks()[k], box.lower[k], box.upper[k]);
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> p(d);
    for (;;) {
      for (int k = 0; k < d; ++k) p[k] = reps[k][idx[k]];
      if (std::fabs(g.value(p)) > 1e-12) {
        std::ostringstream msg;
        msg << "ibp: vanishing_faces mode requires g = 0 on the lower face x_" << (j + 1)
            << " = " << box.lower[j] << ", violated at (";
        for (int k = 0; k < d; ++k) msg << (k ? "," : "") << p[k];
        msg << ")";
        throw std::invalid_argument(msg.str());
      }
      int k = d - 1;
      for (; k >= 0; --k) {
        if (++idx[k] < reps[k].size()) break;
        idx[k] = 0;
      }
      if (k < 0) break;
    }
  }
}

}  // namespace

std::vector<IbpTerm> ibp_terms(const GridStepFunction& f, const GridStepFunction& g,
                               const Box& box, IbpMode mode, bool left_limits) {
  const int d = f.dim();
  if (g.dim() != d || box.dim() != d)
    throw std::invalid_argument("ibp: dimension mismatch between f, g and box");
  if (mode == IbpMode::vanishing_faces) check_vanishing_faces(g, box);

  const std::uint32_t full = (1u << d) - 1u;
  std::vector<IbpTerm> terms;
  std::vector<double> corner(d);
  for (std::uint32_t i1 = 0; i1 <= full; ++i1) {
    const std::uint32_t rest = full & ~i1;
    for (std::uint32_t i2 = 0; i2 <= full; ++i2) {
      if ((i2 & ~rest) != 0) continue;
      if (mode == IbpMode::vanishing_faces && i2 != 0) continue;
      const std::uint32_t i3 = rest & ~i2;
      const int sign_pow = std::popcount(i1) + std::popcount(i2);
      const double sign = (sign_pow % 2 == 0) ? 1.0 : -1.0;

      IbpTerm term{i1, i2, i3, 0.0};
      for (int j = 0; j < d; ++j)
        corner[j] = ((i2 >> j) & 1u) ? box.lower[j] : box.upper[j];

      if (i1 == 0) {
        // No integration variable: the term is the corner product (f*g).
        term.value = sign * f.value(corner) * g.value(corner);
      } else {
        const IndexSet I1(d, i1);
        const GridStepFunction proj = slice(f, I1, corner);
        std::vector<double> lo, hi;
        for (int j = 0; j < d; ++j)
          if ((i1 >> j) & 1u) {
            lo.push_back(box.lower[j]);
            hi.push_back(box.upper[j]);
          }
        const SignedMeasure mu = as_measure(proj).restricted_to(Box(lo, hi));
        std::vector<double> p = corner;
        std::vector<int> axes;
        for (int j = 0; j < d; ++j)
          if ((i1 >> j) & 1u) axes.push_back(j);
        double acc = 0.0;
        for (const auto& atom : mu.atoms) {
          for (std::size_t t = 0; t < axes.size(); ++t) p[axes[t]] = atom.loc[t];
          const double gv = left_limits ? g.value_left(p, I1) : g.value(p);
          acc += gv * atom.weight;
        }
        term.value = sign * acc;
      }
      terms.push_back(term);
    }
  }
  return terms;
}

double ibp_rhs(const GridStepFunction& f, const GridStepFunction& g, const Box& box,
               IbpMode mode) {
  double s = 0.0;
  for (const auto& t : ibp_terms(f, g, box, mode)) s += t.value;
  return s;
}

IbpReport ibp_check(const GridStepFunction& f, const GridStepFunction& g,
                    const Box& box, IbpMode mode) {
  IbpReport rep;
  rep.lhs = integrate(f, as_measure(g).restricted_to(box));
  const auto terms = ibp_terms(f, g, box, mode);
  for (const auto& t : terms) {
    rep.rhs += t.value;
    rep.max_term_magnitude = std::max(rep.max_term_magnitude, std::fabs(t.value));
  }
  rep.term_count = static_cast<int>(terms.size());
  rep.abs_diff = std::fabs(rep.lhs - rep.rhs);
  return rep;
}

}  // namespace ecp
