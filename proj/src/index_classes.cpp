#include "ecp/index_classes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ecp {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s;
}

// All tuples with entries from the per-axis lists, row-major.
void for_each_tuple(const std::vector<std::vector<double>>& axes,
                    const std::function<void(const std::vector<double>&,
                                             const std::vector<int>&)>& fn) {
  const int d = static_cast<int>(axes.size());
  std::vector<int> idx(d, 0);
  std::vector<double> tup(d);
  for (;;) {
    for (int j = 0; j < d; ++j) tup[j] = axes[j][idx[j]];
    fn(tup, idx);
    int j = d - 1;
    for (; j >= 0; --j) {
      if (++idx[j] < static_cast<int>(axes[j].size())) break;
      idx[j] = 0;
    }
    if (j < 0) return;
  }
}

IndexFunction make_indicator(int dim, const std::vector<double>& u) {
  // right-continuous indicator 1{x < u}, as a two-break step grid per axis
  std::vector<std::vector<double>> breaks(dim);
  std::size_t cells = 1;
  for (int j = 0; j < dim; ++j) {
    breaks[j] = {0.0, u[j]};
    cells *= 2;
  }
  std::vector<double> values(cells, 0.0);
  values[0] = 1.0;  // the all-lowest cell, prod_j [0, u_j)
  auto gsf = std::make_shared<const GridStepFunction>(std::move(breaks),
                                                      std::move(values));
  IndexFunction g;
  g.id = "ind(" + join(u) + ")";
  g.dim = dim;
  g.kind = ClassKind::indicator;
  g.params = u;
  g.hk_bound = hk_variation(*gsf);
  g.box_measure = gsf;
  g.eval = [gsf](std::span<const double> x) { return gsf->value(x); };
  return g;
}

IndexFunction make_mgf(int dim, const std::vector<double>& t) {
  IndexFunction g;
  g.id = "mgf(" + join(t) + ")";
  g.dim = dim;
  g.kind = ClassKind::mgf;
  g.params = t;
  double hk = 1.0;
  for (double tj : t) hk *= 2.0 * std::exp(tj) - 1.0;
  g.hk_bound = hk;
  g.eval = [t](std::span<const double> x) {
    double dot = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) dot += t[j] * x[j];
    return std::exp(dot);
  };
  g.gradient = [t](std::span<const double> x, int k) {
    double dot = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) dot += t[j] * x[j];
    return t[k] * std::exp(dot);
  };
  return g;
}

IndexFunction make_monomial(int dim, const std::vector<double>& expo) {
  IndexFunction g;
  g.id = "poly(" + join(expo) + ")";
  g.dim = dim;
  g.kind = ClassKind::polynomial;
  g.params = expo;
  int support = 0;
  for (double a : expo)
    if (a > 0) ++support;
  g.hk_bound = static_cast<double>(1u << support);
  g.eval = [expo](std::span<const double> x) {
    double p = 1.0;
    for (std::size_t j = 0; j < expo.size(); ++j)
      if (expo[j] != 0.0) p *= std::pow(x[j], expo[j]);
    return p;
  };
  g.gradient = [expo](std::span<const double> x, int k) {
    if (expo[k] == 0.0) return 0.0;
    double p = expo[k] * std::pow(x[k], expo[k] - 1.0);
    for (std::size_t j = 0; j < expo.size(); ++j)
      if (static_cast<int>(j) != k && expo[j] != 0.0) p *= std::pow(x[j], expo[j]);
    return p;
  };
  return g;
}

}  // namespace

IndexClass build_class(const ClassSpec& spec) {
  if (spec.dim < 1) throw std::invalid_argument("build_class: dim must be >= 1");
  IndexClass cls;
  cls.kind = spec.kind;
  cls.dim = spec.dim;
  switch (spec.kind) {
    case ClassKind::indicator: {
      if (spec.grid < 1)
        throw std::invalid_argument("build_class: indicator needs grid >= 1");
      cls.spec = "indicator:grid=" + std::to_string(spec.grid);
      std::vector<double> pts(spec.grid);
      for (int k = 1; k <= spec.grid; ++k)
        pts[k - 1] = static_cast<double>(k) / (spec.grid + 1);
      std::vector<std::vector<double>> axes(spec.dim, pts);
      for_each_tuple(axes, [&](const std::vector<double>& u, const std::vector<int>&) {
        cls.functions.push_back(make_indicator(spec.dim, u));
      });
      break;
    }
    case ClassKind::mgf: {
      if (spec.grid < 1) throw std::invalid_argument("build_class: mgf needs grid >= 1");
      cls.spec = "mgf:grid=" + std::to_string(spec.grid);
      std::vector<double> ts(spec.grid);
      if (spec.grid == 1)
        ts[0] = 1.0;
      else
        for (int k = 0; k < spec.grid; ++k)
          ts[k] = static_cast<double>(k) / (spec.grid - 1);
      cls.mgf_axis_t.assign(spec.dim, ts);
      std::vector<std::vector<double>> axes(spec.dim, ts);
      for_each_tuple(axes,
                     [&](const std::vector<double>& t, const std::vector<int>& idx) {
                       cls.functions.push_back(make_mgf(spec.dim, t));
                       cls.mgf_member_idx.push_back(idx);
                     });
      break;
    }
    case ClassKind::polynomial: {
      if (spec.degree < 0 || spec.degree > 6)
        throw std::invalid_argument("build_class: poly needs 0 <= deg <= 6");
      cls.spec = "poly:deg=" + std::to_string(spec.degree);
      // all monomials with total degree at most `degree`, lexicographic
      std::vector<double> expo(spec.dim, 0.0);
      std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == spec.dim) {
          cls.functions.push_back(make_monomial(spec.dim, expo));
          return;
        }
        for (int a = 0; a <= left; ++a) {
          expo[axis] = a;
          rec(axis + 1, left - a);
        }
        expo[axis] = 0.0;
      };
      rec(0, spec.degree);
      break;
    }
    case ClassKind::step: {
      if (spec.res < 1 || spec.count < 1 || !(spec.hk_cap > 0.0))
        throw std::invalid_argument(
            "build_class: step needs res >= 1, count >= 1 and T > 0");
      std::ostringstream os;
      os << "step:res=" << spec.res << ",count=" << spec.count << ",T=" << fmt(spec.hk_cap)
         << ",seed=" << spec.seed;
      cls.spec = os.str();
      for (int m = 0; m < spec.count; ++m) {
        Rng rng(derive_seed(spec.seed, SeedStream::pair_gen, static_cast<std::uint64_t>(m)));
        GridStepFunction raw = random_step_function(rng, spec.dim, spec.res);
        const double hk = hk_variation(raw);
        std::vector<double> vals = raw.cell_values();
        if (hk > spec.hk_cap && hk > 0.0) {
          const double scale = spec.hk_cap / hk;
          for (double& v : vals) v *= scale;
        }
        auto gsf = std::make_shared<const GridStepFunction>(raw.axis_breaks(),
                                                            std::move(vals));
        IndexFunction g;
        g.id = "step[" + std::to_string(m) + "]";
        g.dim = spec.dim;
        g.kind = ClassKind::step;
        g.hk_bound = hk_variation(*gsf);
        g.box_measure = gsf;
        g.eval = [gsf](std::span<const double> x) { return gsf->value(x); };
        cls.functions.push_back(std::move(g));
      }
      break;
    }
  }
  return cls;
}

IndexClass parse_class_spec(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);

  ClassSpec cs;
  cs.dim = dim;
  std::istringstream in(args);
  std::string item;
  auto bad = [&](const std::string& what) {
    return std::invalid_argument("bad class spec '" + spec + "': " + what);
  };
  std::vector<std::pair<std::string, double>> kv;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw bad("expected key=value, got '" + item + "'");
    try {
      kv.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
    } catch (const std::invalid_argument&) {
      throw bad("cannot parse number in '" + item + "'");
    }
  }
  auto get = [&](const std::string& key, double fallback, bool* found = nullptr) {
    for (const auto& [k, v] : kv)
      if (k == key) {
        if (found) *found = true;
        return v;
      }
    if (found) *found = false;
    return fallback;
  };

  if (head == "indicator") {
    cs.kind = ClassKind::indicator;
    cs.grid = static_cast<int>(get("grid", 0));
  } else if (head == "mgf") {
    cs.kind = ClassKind::mgf;
    cs.grid = static_cast<int>(get("grid", 0));
  } else if (head == "poly") {
    cs.kind = ClassKind::polynomial;
    cs.degree = static_cast<int>(get("deg", -1));
  } else if (head == "step") {
    cs.kind = ClassKind::step;
    cs.res = static_cast<int>(get("res", 0));
    cs.count = static_cast<int>(get("count", 0));
    cs.hk_cap = get("T", 0.0);
    cs.seed = static_cast<std::uint64_t>(get("seed", 0.0));
  } else {
    throw std::invalid_argument("unknown class spec '" + spec + "' (offending token: '" +
                                head + "')");
  }
  return build_class(cs);
}

void eval_all(const IndexClass& cls, std::span<const double> x, std::span<double> out) {
  if (out.size() != cls.functions.size())
    throw std::invalid_argument("eval_all: output size mismatch");
  if (static_cast<int>(x.size()) != cls.dim)
    throw std::invalid_argument("eval_all: dimension mismatch");
  if (cls.kind == ClassKind::mgf && !cls.mgf_axis_t.empty()) {
    // factorized: exp(<t,x>) = prod_j exp(t_j x_j) over per-axis tables
    thread_local std::vector<double> table;
    thread_local std::vector<std::size_t> offset;
    offset.assign(cls.dim + 1, 0);
    for (int j = 0; j < cls.dim; ++j)
      offset[j + 1] = offset[j] + cls.mgf_axis_t[j].size();
    table.resize(offset.back());
    for (int j = 0; j < cls.dim; ++j)
      for (std::size_t a = 0; a < cls.mgf_axis_t[j].size(); ++a)
        table[offset[j] + a] = std::exp(cls.mgf_axis_t[j][a] * x[j]);
    for (std::size_t m = 0; m < cls.functions.size(); ++m) {
      double p = 1.0;
      for (int j = 0; j < cls.dim; ++j)
        p *= table[offset[j] + cls.mgf_member_idx[m][j]];
      out[m] = p;
    }
    return;
  }
  for (std::size_t m = 0; m < cls.functions.size(); ++m)
    out[m] = cls.functions[m].eval(x);
}

VariationResult class_hk_bound(const IndexClass& cls, const RefineOptions& opts) {
  VariationResult res;
  res.converged = true;
  for (const auto& g : cls.functions) {
    if (g.has_box_measure()) {
      res.value = std::max(res.value, hk_variation(*g.box_measure));
    } else {
      const VariationResult term = hk_variation(g.eval, g.dim, opts);
      res.value = std::max(res.value, term.value);
      res.converged = res.converged && term.converged;
      res.depth = std::max(res.depth, term.depth);
    }
  }
  return res;
}

}  // namespace ecp
