#include "ecp/bv_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecp {

namespace {

int popcount(std::uint32_t bits) { return std::popcount(bits); }

void check_dim(int dim) {
  if (dim < 1 || dim > 20) throw std::invalid_argument("dimension must be in [1,20]");
}

}  // namespace

Box::Box(std::vector<double> lo, std::vector<double> up)
    : lower(std::move(lo)), upper(std::move(up)) {
  if (lower.empty() || lower.size() != upper.size())
    throw std::invalid_argument("Box: lower/upper must be nonempty and of equal length");
  for (std::size_t j = 0; j < lower.size(); ++j)
    if (!(lower[j] <= upper[j]))
      throw std::invalid_argument("Box: requires lower <= upper coordinatewise");
}

Box unit_box(int dim) {
  check_dim(dim);
  return Box(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

IndexSet::IndexSet(int dim, std::uint32_t bits) : dim_(dim), bits_(bits) {
  check_dim(dim);
  if (dim < 32 && (bits >> dim) != 0)
    throw std::invalid_argument("IndexSet: bits outside {0,...,d-1}");
}

IndexSet IndexSet::full(int dim) {
  check_dim(dim);
  return IndexSet(dim, (dim >= 32) ? ~0u : ((1u << dim) - 1u));
}

int IndexSet::count() const { return popcount(bits_); }

IndexSet IndexSet::complement() const {
  return IndexSet(dim_, IndexSet::full(dim_).bits() & ~bits_);
}

Ladder dyadic_ladder(int dim, int depth) {
  check_dim(dim);
  if (depth < 0) throw std::invalid_argument("dyadic_ladder: negative depth");
  const std::size_t n = (std::size_t(1) << depth);
  std::vector<double> cuts;
  cuts.reserve(n - 1);
  for (std::size_t k = 1; k < n; ++k)
    cuts.push_back(static_cast<double>(k) / static_cast<double>(n));
  Ladder lad;
  lad.cuts.assign(dim, cuts);
  return lad;
}

GridStepFunction::GridStepFunction(std::vector<std::vector<double>> axis_breaks,
                                   std::vector<double> cell_values)
    : breaks_(std::move(axis_breaks)), values_(std::move(cell_values)) {
  check_dim(static_cast<int>(breaks_.size()));
  std::size_t cells = 1;
  for (const auto& br : breaks_) {
    if (br.empty() || br.front() != 0.0)
      throw std::invalid_argument("GridStepFunction: every axis needs breakpoints starting at 0");
    for (std::size_t k = 0; k < br.size(); ++k) {
      if (br[k] < 0.0 || br[k] >= 1.0)
        throw std::invalid_argument("GridStepFunction: breakpoints must lie in [0,1)");
      if (k > 0 && !(br[k - 1] < br[k]))
        throw std::invalid_argument("GridStepFunction: breakpoints must be strictly increasing");
    }
    cells *= br.size();
  }
  if (values_.size() != cells)
    throw std::invalid_argument("GridStepFunction: cell_values size must equal the cell count");
  for (double v : values_)
    if (!std::isfinite(v))
      throw std::invalid_argument("GridStepFunction: cell values must be finite");
  strides_.assign(breaks_.size(), 1);
  for (int j = dim() - 2; j >= 0; --j)
    strides_[j] = strides_[j + 1] * breaks_[j + 1].size();
}

std::size_t GridStepFunction::cell_of(int axis, double x) const {
  const auto& br = breaks_[axis];
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("GridStepFunction: point outside [0,1]^d");
  auto it = std::upper_bound(br.begin(), br.end(), x);
  return static_cast<std::size_t>(it - br.begin()) - 1;
}

double GridStepFunction::value(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim())
    throw std::invalid_argument("GridStepFunction::value: dimension mismatch");
  std::size_t idx = 0;
  for (int j = 0; j < dim(); ++j) idx += strides_[j] * cell_of(j, x[j]);
  return values_[idx];
}

double GridStepFunction::value_left(std::span<const double> x, const IndexSet& left) const {
  if (static_cast<int>(x.size()) != dim() || left.dim() != dim())
    throw std::invalid_argument("GridStepFunction::value_left: dimension mismatch");
  std::size_t idx = 0;
  for (int j = 0; j < dim(); ++j) {
    std::size_t c = cell_of(j, x[j]);
    if (left.contains(j) && c > 0 && breaks_[j][c] == x[j]) --c;
    idx += strides_[j] * c;
  }
  return values_[idx];
}

PointFn GridStepFunction::as_fn() const {
  return [f = *this](std::span<const double> x) { return f.value(x); };
}

double SignedMeasure::total_variation() const {
  double s = 0.0;
  for (const auto& a : atoms) s += std::fabs(a.weight);
  return s;
}

double SignedMeasure::cdf(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim)
    throw std::invalid_argument("SignedMeasure::cdf: dimension mismatch");
  double s = 0.0;
  for (const auto& a : atoms) {
    bool inside = true;
    for (int j = 0; j < dim && inside; ++j) inside = a.loc[j] <= x[j];
    if (inside) s += a.weight;
  }
  return s;
}

SignedMeasure SignedMeasure::restricted_to(const Box& box) const {
  if (box.dim() != dim)
    throw std::invalid_argument("SignedMeasure::restricted_to: dimension mismatch");
  SignedMeasure out;
  out.dim = dim;
  for (const auto& a : atoms) {
    bool inside = true;
    for (int j = 0; j < dim && inside; ++j)
      inside = box.lower[j] < a.loc[j] && a.loc[j] <= box.upper[j];
    if (inside) out.atoms.push_back(a);
  }
  return out;
}

double generalized_volume(const PointFn& f, const Box& box) {
  const int d = box.dim();
  std::vector<double> corner(d);
  double s = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    // mask selects the coordinates taking the lower corner
    for (int j = 0; j < d; ++j)
      corner[j] = ((mask >> j) & 1u) ? box.lower[j] : box.upper[j];
    const double v = f(corner);
    s += (popcount(mask) % 2 == 0) ? v : -v;
  }
  return s;
}

double generalized_volume(const GridStepFunction& f, const Box& box) {
  if (box.dim() != f.dim())
    throw std::invalid_argument("generalized_volume: dimension mismatch");
  return generalized_volume(f.as_fn(), box);
}

double projection_measure_weight(const PointFn& f, int dim, const IndexSet& I,
                                 std::span<const double> lower_I,
                                 std::span<const double> upper_I,
                                 std::span<const double> corner) {
  if (I.dim() != dim) throw std::invalid_argument("projection_measure_weight: dimension mismatch");
  if (I.count() == 0)
    throw std::invalid_argument("projection_measure_weight: I must be nonempty");
  if (static_cast<int>(lower_I.size()) != I.count() ||
      static_cast<int>(upper_I.size()) != I.count() ||
      static_cast<int>(corner.size()) != dim)
    throw std::invalid_argument("projection_measure_weight: argument sizes inconsistent");

  std::vector<int> axes;
  for (int j = 0; j < dim; ++j)
    if (I.contains(j)) axes.push_back(j);

  std::vector<double> p(corner.begin(), corner.end());
  const int k = static_cast<int>(axes.size());
  double s = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    for (int t = 0; t < k; ++t)
      p[axes[t]] = ((mask >> t) & 1u) ? lower_I[t] : upper_I[t];
    const double v = f(p);
    s += (popcount(mask) % 2 == 0) ? v : -v;
  }
  return s;
}

GridStepFunction slice(const GridStepFunction& f, const IndexSet& keep,
                       std::span<const double> frozen) {
  if (keep.dim() != f.dim() || static_cast<int>(frozen.size()) != f.dim())
    throw std::invalid_argument("slice: dimension mismatch");
  if (keep.count() == 0) throw std::invalid_argument("slice: keep must be nonempty");

  std::vector<int> axes;
  for (int j = 0; j < f.dim(); ++j)
    if (keep.contains(j)) axes.push_back(j);

  std::vector<std::vector<double>> breaks;
  breaks.reserve(axes.size());
  std::size_t cells = 1;
  for (int a : axes) {
    breaks.push_back(f.axis_breaks()[a]);
    cells *= breaks.back().size();
  }

  std::vector<double> point(frozen.begin(), frozen.end());
  std::vector<double> values(cells);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t flat = 0; flat < cells; ++flat) {
    for (std::size_t t = 0; t < axes.size(); ++t)
      point[axes[t]] = breaks[t][idx[t]];
    values[flat] = f.value(point);
    for (int t = static_cast<int>(axes.size()) - 1; t >= 0; --t) {
      if (++idx[t] < breaks[t].size()) break;
      idx[t] = 0;
    }
  }
  return GridStepFunction(std::move(breaks), std::move(values));
}

double ladder_variation_sum(const PointFn& f, int dim, const Ladder& ladder) {
  if (static_cast<int>(ladder.cuts.size()) != dim)
    throw std::invalid_argument("ladder_variation_sum: dimension mismatch");
  for (const auto& cuts : ladder.cuts)
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      if (cuts[k] <= 0.0 || cuts[k] >= 1.0)
        throw std::invalid_argument("ladder_variation_sum: cuts must lie in (0,1)");
      if (k > 0 && !(cuts[k - 1] < cuts[k]))
        throw std::invalid_argument("ladder_variation_sum: cuts must be strictly increasing");
    }
  // Cells run over the ladder points; the successor is the next cut or 1.
  std::vector<std::size_t> sizes(dim);
  std::size_t cells = 1;
  for (int j = 0; j < dim; ++j) {
    sizes[j] = ladder.cuts[j].size();
    if (sizes[j] == 0) return 0.0;  // empty ladder on some axis: no cells
    cells *= sizes[j];
  }
  std::vector<double> lo(dim), up(dim);
  std::vector<std::size_t> idx(dim, 0);
  double s = 0.0;
  for (std::size_t flat = 0; flat < cells; ++flat) {
    for (int j = 0; j < dim; ++j) {
      lo[j] = ladder.cuts[j][idx[j]];
      up[j] = (idx[j] + 1 < sizes[j]) ? ladder.cuts[j][idx[j] + 1] : 1.0;
    }
    s += std::fabs(generalized_volume(f, Box(lo, up)));
    for (int j = dim - 1; j >= 0; --j) {
      if (++idx[j] < sizes[j]) break;
      idx[j] = 0;
    }
  }
  return s;
}

namespace {

// Variation over the dyadic partition, streamed in slabs along axis 0 so the
// corner lattice never needs more than two (d-1)-dimensional planes.
double dyadic_sum_impl(const PointFn& f, int dim, std::size_t n) {
  const auto coord = [n](std::size_t k) {
    return static_cast<double>(k) / static_cast<double>(n);
  };
  if (dim == 1) {
    std::vector<double> x(1);
    x[0] = 0.0;
    double prev = f(x);
    double s = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      x[0] = coord(k);
      const double cur = f(x);
      s += std::fabs(cur - prev);
      prev = cur;
    }
    return s;
  }

  const int rd = dim - 1;
  std::size_t plane = 1;
  for (int j = 0; j < rd; ++j) plane *= (n + 1);
  std::vector<std::size_t> stride(rd, 1);
  for (int j = rd - 2; j >= 0; --j) stride[j] = stride[j + 1] * (n + 1);

  std::vector<double> point(dim);
  auto fill_plane = [&](std::vector<double>& buf, std::size_t slab) {
    point[0] = coord(slab);
    std::vector<std::size_t> idx(rd, 0);
    for (std::size_t flat = 0; flat < plane; ++flat) {
      for (int j = 0; j < rd; ++j) point[j + 1] = coord(idx[j]);
      buf[flat] = f(point);
      for (int j = rd - 1; j >= 0; --j) {
        if (++idx[j] <= n) break;
        idx[j] = 0;
      }
    }
  };

  std::vector<double> prev(plane), cur(plane), diff(plane);
  fill_plane(prev, 0);
  double s = 0.0;
  for (std::size_t slab = 1; slab <= n; ++slab) {
    fill_plane(cur, slab);
    for (std::size_t i = 0; i < plane; ++i) diff[i] = cur[i] - prev[i];
    // (d-1)-dimensional alternating sums of diff over each residual cell
    std::vector<std::size_t> idx(rd, 0);
    const std::size_t rcells = [&] {
      std::size_t c = 1;
      for (int j = 0; j < rd; ++j) c *= n;
      return c;
    }();
    for (std::size_t flat = 0; flat < rcells; ++flat) {
      std::size_t base = 0;
      for (int j = 0; j < rd; ++j) base += stride[j] * idx[j];
      double acc = 0.0;
      for (std::uint32_t mask = 0; mask < (1u << rd); ++mask) {
        std::size_t off = base;
        for (int j = 0; j < rd; ++j)
          if (((mask >> j) & 1u) == 0) off += stride[j];  // upper corner on axis j
        acc += (popcount(mask) % 2 == 0) ? diff[off] : -diff[off];
      }
      s += std::fabs(acc);
      for (int j = rd - 1; j >= 0; --j) {
        if (++idx[j] < n) break;
        idx[j] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return s;
}

bool lattice_within_budget(int dim, int depth, std::size_t budget) {
  const std::size_t side = (std::size_t(1) << depth) + 1;
  std::size_t total = 1;
  for (int j = 0; j < dim; ++j) {
    if (total > budget / side) return false;
    total *= side;
  }
  return total <= budget;
}

}  // namespace

double dyadic_partition_sum(const PointFn& f, int dim, int depth) {
  check_dim(dim);
  if (depth < 0) throw std::invalid_argument("dyadic_partition_sum: negative depth");
  return dyadic_sum_impl(f, dim, std::size_t(1) << depth);
}

double vitali_variation(const GridStepFunction& f) {
  const SignedMeasure mu = as_measure(f);
  double s = 0.0;
  for (const auto& a : mu.atoms) {
    bool interior = true;
    for (double c : a.loc)
      if (c <= 0.0) {
        interior = false;
        break;
      }
    if (interior) s += std::fabs(a.weight);
  }
  return s;
}

VariationResult vitali_variation(const PointFn& f, int dim, const RefineOptions& opts) {
  check_dim(dim);
  VariationResult res;
  if (!lattice_within_budget(dim, 0, opts.max_corner_evals)) return res;
  double prev = dyadic_partition_sum(f, dim, 0);
  res.value = prev;
  res.depth = 0;
  res.last_change = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= opts.max_depth; ++m) {
    if (!lattice_within_budget(dim, m, opts.max_corner_evals)) return res;
    const double cur = dyadic_partition_sum(f, dim, m);
    res.value = cur;
    res.depth = m;
    res.last_change = std::fabs(cur - prev);
    if (res.last_change < opts.tol) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  return res;
}

double hk_variation(const GridStepFunction& f) {
  const int d = f.dim();
  const std::vector<double> ones(d, 1.0);
  double s = std::fabs(f.value(ones));  // I = {}
  for (std::uint32_t bits = 1; bits < (1u << d); ++bits) {
    const IndexSet I(d, bits);
    s += vitali_variation(slice(f, I, ones));
  }
  return s;
}

VariationResult hk_variation(const PointFn& f, int dim, const RefineOptions& opts) {
  check_dim(dim);
  const std::vector<double> ones(dim, 1.0);
  VariationResult res;
  res.converged = true;
  res.value = std::fabs(f(ones));
  // Splitting the tolerance across the 2^d terms keeps the sum within tol.
  RefineOptions per_term = opts;
  per_term.tol = opts.tol / static_cast<double>(1u << dim);
  for (std::uint32_t bits = 1; bits < (1u << dim); ++bits) {
    const IndexSet I(dim, bits);
    std::vector<int> axes;
    for (int j = 0; j < dim; ++j)
      if (I.contains(j)) axes.push_back(j);
    PointFn proj = [&f, axes, dim](std::span<const double> xi) {
      std::vector<double> p(dim, 1.0);
      for (std::size_t t = 0; t < axes.size(); ++t) p[axes[t]] = xi[t];
      return f(p);
    };
    const VariationResult term =
        vitali_variation(proj, static_cast<int>(axes.size()), per_term);
    res.value += term.value;
    res.converged = res.converged && term.converged;
    res.depth = std::max(res.depth, term.depth);
    res.last_change += term.last_change == std::numeric_limits<double>::infinity()
                           ? 0.0
                           : term.last_change;
  }
  return res;
}

SignedMeasure as_measure(const GridStepFunction& f) {
  const int d = f.dim();
  std::vector<double> w = f.cell_values();
  std::vector<std::size_t> sizes(d);
  std::vector<std::size_t> strides(d, 1);
  for (int j = 0; j < d; ++j) sizes[j] = f.axis_breaks()[j].size();
  for (int j = d - 2; j >= 0; --j) strides[j] = strides[j + 1] * sizes[j + 1];

  // Difference transform along each axis; the entry below index 0 is 0.
  for (int j = 0; j < d; ++j) {
    const std::size_t stride = strides[j];
    const std::size_t size = sizes[j];
    for (std::size_t base = 0; base < w.size(); ++base) {
      const std::size_t pos = (base / stride) % size;
      if (pos != 0) continue;
      for (std::size_t k = size - 1; k >= 1; --k)
        w[base + k * stride] -= w[base + (k - 1) * stride];
    }
  }

  SignedMeasure mu;
  mu.dim = d;
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < w.size(); ++flat) {
    if (w[flat] != 0.0) {
      SignedMeasure::Atom a;
      a.loc.resize(d);
      for (int j = 0; j < d; ++j) a.loc[j] = f.axis_breaks()[j][idx[j]];
      a.weight = w[flat];
      mu.atoms.push_back(std::move(a));
    }
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < sizes[j]) break;
      idx[j] = 0;
    }
  }
  return mu;
}

GridStepFunction random_step_function(Rng& rng, int dim, int res) {
  check_dim(dim);
  if (res < 1) throw std::invalid_argument("random_step_function: res must be >= 1");
  std::vector<double> br(res);
  for (int k = 0; k < res; ++k) br[k] = static_cast<double>(k) / res;
  std::vector<std::vector<double>> breaks(dim, br);
  std::size_t cells = 1;
  for (int j = 0; j < dim; ++j) cells *= res;
  std::vector<double> values(cells);
  for (auto& v : values) v = 2.0 * rng.runif() - 1.0;
  return GridStepFunction(std::move(breaks), std::move(values));
}

GridStepFunction random_step_function_jittered(Rng& rng, int dim, int max_breaks) {
  check_dim(dim);
  if (max_breaks < 1)
    throw std::invalid_argument("random_step_function_jittered: max_breaks must be >= 1");
  std::vector<std::vector<double>> breaks(dim);
  std::size_t cells = 1;
  for (int j = 0; j < dim; ++j) {
    const std::size_t extra = rng.uniform_index(static_cast<std::size_t>(max_breaks));
    std::vector<double> br{0.0};
    for (std::size_t k = 0; k < extra; ++k) {
      const double c = rng.runif();
      if (c > 0.0 && c < 1.0) br.push_back(c);
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    cells *= br.size();
    breaks[j] = std::move(br);
  }
  std::vector<double> values(cells);
  for (auto& v : values) v = 2.0 * rng.runif() - 1.0;
  return GridStepFunction(std::move(breaks), std::move(values));
}

}  // namespace ecp
