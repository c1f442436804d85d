#include "ecp/copula_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ecp/gaussian.hpp"

namespace ecp {

namespace {

void check_unit_point(std::span<const double> u, int dim) {
  if (static_cast<int>(u.size()) != dim)
    throw std::invalid_argument("CopulaModel::cdf: dimension mismatch");
  for (double v : u)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("CopulaModel::cdf: point outside [0,1]^d");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

CopulaModel CopulaModel::independence(int dim) {
  if (dim < 1) throw std::invalid_argument("independence: dim must be >= 1");
  CopulaModel m;
  m.family_ = Family::independence;
  m.dim_ = dim;
  m.spec_ = "indep:d=" + std::to_string(dim);
  return m;
}

CopulaModel CopulaModel::frechet_m(int dim) {
  if (dim < 2) throw std::invalid_argument("frechet_m: dim must be >= 2");
  CopulaModel m;
  m.family_ = Family::frechet_m;
  m.dim_ = dim;
  m.spec_ = dim == 2 ? "m" : "m:d=" + std::to_string(dim);
  return m;
}

CopulaModel CopulaModel::frechet_w() {
  CopulaModel m;
  m.family_ = Family::frechet_w;
  m.dim_ = 2;
  m.spec_ = "w";
  return m;
}

CopulaModel CopulaModel::marshall_olkin(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("marshall_olkin: alpha, beta must lie in [0,1]");
  CopulaModel m;
  m.family_ = Family::marshall_olkin;
  m.dim_ = 2;
  m.a_ = alpha;
  m.b_ = beta;
  m.spec_ = "mo:alpha=" + fmt(alpha) + ",beta=" + fmt(beta);
  return m;
}

CopulaModel CopulaModel::cuadras_auge(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw std::invalid_argument("cuadras_auge: theta must lie in [0,1]");
  CopulaModel m = marshall_olkin(theta, theta);
  m.family_ = Family::cuadras_auge;
  m.spec_ = "ca:theta=" + fmt(theta);
  return m;
}

CopulaModel CopulaModel::gaussian(double rho) {
  if (!(rho > -1.0 && rho < 1.0))
    throw std::invalid_argument("gaussian: rho must lie in (-1,1)");
  CopulaModel m;
  m.family_ = Family::gaussian;
  m.dim_ = 2;
  m.rho_ = rho;
  m.spec_ = "gauss:rho=" + fmt(rho);
  return m;
}

CopulaModel CopulaModel::delta_construction(std::function<double(double)> delta,
                                            DeltaForm form, double mesh) {
  if (!delta) throw std::invalid_argument("delta_construction: missing delta");
  if (!(mesh > 0.0 && mesh < 1.0))
    throw std::invalid_argument("delta_construction: mesh must lie in (0,1)");
  CopulaModel m;
  m.family_ = Family::delta;
  m.dim_ = 2;
  m.delta_ = std::move(delta);
  m.delta_form_ = form;
  m.delta_mesh_ = mesh;
  m.spec_ = form == DeltaForm::min_form ? "delta:min" : "delta:inf";
  return m;
}

double CopulaModel::cdf(std::span<const double> u) const {
  check_unit_point(u, dim_);
  switch (family_) {
    case Family::independence: {
      double p = 1.0;
      for (double v : u) p *= v;
      return p;
    }
    case Family::frechet_m: {
      double m = 1.0;
      for (double v : u) m = std::min(m, v);
      return m;
    }
    case Family::frechet_w:
      return std::max(u[0] + u[1] - 1.0, 0.0);
    case Family::marshall_olkin:
    case Family::cuadras_auge: {
      if (u[0] == 0.0 || u[1] == 0.0) return 0.0;
      return std::min(std::pow(u[0], 1.0 - a_) * u[1],
                      u[0] * std::pow(u[1], 1.0 - b_));
    }
    case Family::gaussian: {
      if (u[0] == 0.0 || u[1] == 0.0) return 0.0;
      if (u[0] == 1.0) return u[1];
      if (u[1] == 1.0) return u[0];
      return bvn_cdf(norm_icdf(u[0]), norm_icdf(u[1]), rho_);
    }
    case Family::delta: {
      const double lo = std::min(u[0], u[1]);
      const double hi = std::max(u[0], u[1]);
      if (delta_form_ == DeltaForm::min_form)
        return std::min(lo, 0.5 * (delta_(u[0]) + delta_(u[1])));
      // infimum of x - delta(x) over [lo, hi]: mesh points plus endpoints
      double inf = std::min(lo - delta_(lo), hi - delta_(hi));
      const long k0 = static_cast<long>(std::ceil(lo / delta_mesh_));
      for (long k = k0; k * delta_mesh_ < hi; ++k) {
        const double x = k * delta_mesh_;
        if (x <= lo) continue;
        inf = std::min(inf, x - delta_(x));
      }
      return lo - inf;
    }
  }
  return 0.0;
}

PointFn CopulaModel::cdf_fn() const {
  return [m = *this](std::span<const double> u) { return m.cdf(u); };
}

SampleMatrix CopulaModel::sample(std::size_t n, std::uint64_t seed) const {
  if (!has_sampler())
    throw std::invalid_argument("CopulaModel::sample: family '" + spec_ +
                                "' has no sampler");
  SampleMatrix out;
  out.n = n;
  out.dim = dim_;
  out.values.resize(n * static_cast<std::size_t>(dim_));
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out.values.data() + i * static_cast<std::size_t>(dim_);
    switch (family_) {
      case Family::independence:
        for (int j = 0; j < dim_; ++j) row[j] = rng.runif();
        break;
      case Family::frechet_m: {
        const double u = rng.runif();
        for (int j = 0; j < dim_; ++j) row[j] = u;
        break;
      }
      case Family::frechet_w: {
        const double u = rng.runif();
        row[0] = u;
        row[1] = 1.0 - u;
        break;
      }
      case Family::marshall_olkin:
      case Family::cuadras_auge: {
        if (a_ == 0.0 || b_ == 0.0) {
          // no common shock: the copula degenerates to independence
          row[0] = rng.runif();
          row[1] = rng.runif();
          break;
        }
        // exponential shock construction with unit common-shock rate
        const double l1 = (1.0 - a_) / a_;
        const double l2 = (1.0 - b_) / b_;
        const double e1 = rng.rexp();
        const double e2 = rng.rexp();
        const double e12 = rng.rexp();
        const double x = (l1 == 0.0) ? e12 : std::min(e1 / l1, e12);
        const double y = (l2 == 0.0) ? e12 : std::min(e2 / l2, e12);
        row[0] = std::exp(-x / a_);
        row[1] = std::exp(-y / b_);
        break;
      }
      case Family::gaussian: {
        const double z1 = norm_icdf(rng.runif_open());
        const double z2 = norm_icdf(rng.runif_open());
        row[0] = norm_cdf(z1);
        row[1] = norm_cdf(rho_ * z1 + std::sqrt(1.0 - rho_ * rho_) * z2);
        break;
      }
      case Family::delta:
        break;  // unreachable
    }
  }
  return out;
}

SampleMatrix CopulaModel::sample_stationary(double mixing_rho, std::size_t n,
                                            std::uint64_t seed) const {
  if (family_ != Family::gaussian)
    throw std::invalid_argument(
        "sample_stationary: the latent-Gaussian construction requires the "
        "gaussian family");
  if (!(mixing_rho > 0.0 && mixing_rho < 1.0))
    throw std::invalid_argument("sample_stationary: mixing_rho must lie in (0,1)");
  SampleMatrix out;
  out.n = n;
  out.dim = dim_;
  out.values.resize(n * 2);
  Rng rng(seed);
  const double cross = std::sqrt(1.0 - rho_ * rho_);
  auto draw_pair = [&](double& w1, double& w2) {
    const double z1 = norm_icdf(rng.runif_open());
    const double z2 = norm_icdf(rng.runif_open());
    w1 = z1;
    w2 = rho_ * z1 + cross * z2;
  };
  double w1 = 0.0, w2 = 0.0;
  draw_pair(w1, w2);
  const double innov = std::sqrt(1.0 - mixing_rho * mixing_rho);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      double e1 = 0.0, e2 = 0.0;
      draw_pair(e1, e2);
      w1 = mixing_rho * w1 + innov * e1;
      w2 = mixing_rho * w2 + innov * e2;
    }
    out.values[i * 2] = norm_cdf(w1);
    out.values[i * 2 + 1] = norm_cdf(w2);
  }
  return out;
}

namespace {

std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& args,
                                                          const std::string& spec) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in(args);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("bad spec '" + spec + "': expected key=value, got '" +
                                  item + "'");
    kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return kv;
}

double to_num(const std::string& s, const std::string& spec) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    throw std::invalid_argument("bad spec '" + spec + "': cannot parse number '" + s +
                                "'");
  }
  if (pos != s.size())
    throw std::invalid_argument("bad spec '" + spec + "': cannot parse number '" + s +
                                "'");
  return v;
}

}  // namespace

CopulaModel parse_model_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const auto kv = parse_kv(args, spec);
  auto get = [&](const std::string& key) -> const std::string* {
    for (const auto& [k, v] : kv)
      if (k == key) return &v;
    return nullptr;
  };
  auto require_keys = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : kv) {
      (void)v;
      bool known = false;
      for (const char* kk : keys) known = known || k == kk;
      if (!known)
        throw std::invalid_argument("bad spec '" + spec + "': unknown key '" + k + "'");
    }
  };

  if (head == "indep") {
    require_keys({"d"});
    const auto* d = get("d");
    return CopulaModel::independence(d ? static_cast<int>(to_num(*d, spec)) : 2);
  }
  if (head == "m") {
    require_keys({"d"});
    const auto* d = get("d");
    return CopulaModel::frechet_m(d ? static_cast<int>(to_num(*d, spec)) : 2);
  }
  if (head == "w") {
    require_keys({});
    return CopulaModel::frechet_w();
  }
  if (head == "mo") {
    require_keys({"alpha", "beta"});
    const auto* a = get("alpha");
    const auto* b = get("beta");
    if (!a || !b)
      throw std::invalid_argument("bad spec '" + spec + "': mo needs alpha and beta");
    return CopulaModel::marshall_olkin(to_num(*a, spec), to_num(*b, spec));
  }
  if (head == "ca") {
    require_keys({"theta"});
    const auto* t = get("theta");
    if (!t) throw std::invalid_argument("bad spec '" + spec + "': ca needs theta");
    return CopulaModel::cuadras_auge(to_num(*t, spec));
  }
  if (head == "gauss") {
    require_keys({"rho"});
    const auto* r = get("rho");
    if (!r) throw std::invalid_argument("bad spec '" + spec + "': gauss needs rho");
    return CopulaModel::gaussian(to_num(*r, spec));
  }
  throw std::invalid_argument("unknown model spec '" + spec + "' (offending token: '" +
                              head + "')");
}

}  // namespace ecp
