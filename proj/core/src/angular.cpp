#include "extskewt/angular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "extskewt/special.hpp"

namespace extskewt {

void PartitionConfig::validate() const {
  if (!(c >= 0.0 && c <= 0.1))
    throw std::domain_error("PartitionConfig: c must be in [0, 0.1]");
  if (r0 <= 0.0 && top_k < 1)
    throw std::domain_error("PartitionConfig: need top_k >= 1 or r0 > 0");
}

std::pair<double, Vector> pseudo_polar(const Vector& x) {
  double r = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if (!(x(i) > 0.0))
      throw std::domain_error("pseudo_polar: x must be strictly positive");
    r += x(i);
  }
  return {r, x / r};
}

PartitionLabel classify(const Vector& w, double c) {
  const int d = static_cast<int>(w.size());
  if (d != 2 && d != 3) throw std::domain_error("classify: d = 2 or 3");
  for (int j = 0; j < d; ++j)
    if (w(j) > 1.0 - c) return {Region::Vertex, j, -1};
  if (d == 3) {
    for (int j = 0; j < 3; ++j) {
      for (int k = j + 1; k < 3; ++k) {
        const int l = 3 - j - k;
        if (w(j) < 1.0 - c && w(k) < 1.0 - c && w(l) < c &&
            w(j) > 1.0 - 2.0 * w(k) && w(k) > 1.0 - 2.0 * w(j))
          return {Region::Edge, j, k};
      }
    }
  }
  return {Region::Interior, -1, -1};
}

double vertex_mass(const ExtDepModel& model, const MarginDerived& md, int j,
                   const QmcConfig& cfg) {
  const int d = model.dim();
  if (j < 0 || j >= d) throw std::domain_error("vertex_mass: bad index");
  if (d < 2) throw std::domain_error("vertex_mass: d >= 2");
  Vector u(d - 1);
  int p = 0;
  for (int i = 0; i < d; ++i) {
    if (i == j) continue;
    const double w = model.corr(i, j);
    u(p++) = -std::sqrt((model.nu + 1.0) / (1.0 - w * w)) * w;
  }
  SkewTParams par;
  par.mu = Vector::Zero(d - 1);
  par.omega = md.corr_circ[j];
  par.alpha = md.alpha_circ[j];
  par.tau = md.tau_circ(j);
  par.kappa = md.kappa_circ(j);
  par.nu = model.nu + 1.0;
  return ncest_cdf(u, par, cfg).value;
}

double interior_density(const UnitFrechetV& v, const Vector& w) {
  return v.interior_density(w);
}

double edge_density(const UnitFrechetV& v, int i, int j, double t) {
  return v.edge_density(i, j, t);
}

namespace {

// integral of f over (0, 1) with x^{1/nu - 1} endpoint behaviour removed by
// the substitution t = (1/2) s^nu on each half
double integrate_01_power(const std::function<double(double)>& f, double nu,
                          double tol) {
  auto lower = [&](double s) {
    const double t = 0.5 * std::pow(s, nu);
    return f(t) * 0.5 * nu * std::pow(s, nu - 1.0);
  };
  auto upper = [&](double s) {
    const double t = 1.0 - 0.5 * std::pow(s, nu);
    return f(t) * 0.5 * nu * std::pow(s, nu - 1.0);
  };
  return integrate_gk(lower, 1e-12, 1.0, tol, 1e-9) +
         integrate_gk(upper, 1e-12, 1.0, tol, 1e-9);
}

}  // namespace

double edge_mass(const UnitFrechetV& v, int i, int j, double tol) {
  return integrate_01_power(
      [&](double t) { return v.edge_density(i, j, t); }, v.model().nu, tol);
}

namespace {

// 2-D integral of g(w1, w2) over the open simplex w1, w2 > 0, w1 + w2 < 1,
// with power substitutions against the boundary singularities
double simplex_integral(const std::function<double(double, double)>& g,
                        double nu, double tol) {
  auto inner = [&](double w1) {
    return (1.0 - w1) *
           integrate_01_power(
               [&](double z) { return g(w1, (1.0 - w1) * z); }, nu,
               0.3 * tol);
  };
  return integrate_01_power(inner, nu, tol);
}

}  // namespace

RescalingConstants rescaling_constants(const UnitFrechetV& v, double c,
                                       const QmcConfig& cfg) {
  (void)cfg;
  RescalingConstants out;
  if (c == 0.0) return out;  // raw densities, no partition mass
  if (!(c > 0.0 && c <= 0.1))
    throw std::domain_error("rescaling_constants: c in (0, 0.1]");
  out.rescaled = true;
  const int d = v.dim();
  const double nu = v.model().nu;
  if (d == 2) {
    out.k_vertex = 1.0 / c;  // interval length replaces the corner area
    const double full = integrate_01_power(
        [&](double t) {
          Vector w(2);
          w << t, 1.0 - t;
          return v.interior_density(w);
        },
        nu, 1e-8);
    const double trunc = integrate_gk(
        [&](double t) {
          Vector w(2);
          w << t, 1.0 - t;
          return v.interior_density(w);
        },
        c, 1.0 - c, 1e-9, 1e-9);
    out.k_interior = full / trunc;
    return out;
  }
  out.k_vertex = 4.0 / (std::sqrt(3.0) * c * c);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double me = edge_mass(v, i, j);
      out.k_edge[i][j] = out.k_edge[j][i] =
          2.0 * me / (c * std::sqrt(3.0) * (1.0 - 2.0 * c));
    }
  const double full = simplex_integral(
      [&](double w1, double w2) {
        Vector w(3);
        w << w1, w2, 1.0 - w1 - w2;
        return v.interior_density(w);
      },
      nu, 1e-5);
  // truncated interior: all coordinates above c
  auto inner = [&](double w1) {
    return integrate_gk(
        [&](double w2) {
          Vector w(3);
          w << w1, w2, 1.0 - w1 - w2;
          return v.interior_density(w);
        },
        c, 1.0 - w1 - c, 1e-8, 1e-7);
  };
  const double trunc = integrate_gk(inner, c, 1.0 - 2.0 * c, 1e-6, 1e-6);
  out.k_interior = full / trunc;
  return out;
}

double angular_loglik(const UnitFrechetV& v,
                      const std::vector<AngularSample>& samples,
                      const PartitionConfig& pc, const QmcConfig& cfg,
                      int* bad_index) {
  pc.validate();
  if (bad_index) *bad_index = -1;
  if (samples.empty()) return 0.0;
  const int d = v.dim();
  const RescalingConstants k = rescaling_constants(v, pc.c, cfg);
  // vertex masses are sample independent
  Vector vmass(d);
  for (int j = 0; j < d; ++j)
    vmass(j) = vertex_mass(v.model(), v.margins(), j, cfg);

  double ll = 0.0;
  for (size_t idx = 0; idx < samples.size(); ++idx) {
    const AngularSample& s = samples[idx];
    double dens = 0.0;
    switch (s.label.region) {
      case Region::Vertex:
        dens = k.k_vertex * vmass(s.label.a);
        break;
      case Region::Edge: {
        const double t =
            s.w(s.label.a) / (s.w(s.label.a) + s.w(s.label.b));
        dens = k.k_edge[s.label.a][s.label.b] *
               v.edge_density(s.label.a, s.label.b, t);
        break;
      }
      case Region::Interior:
        dens = (k.rescaled ? k.k_interior : 1.0) * v.interior_density(s.w);
        break;
    }
    if (!(dens > 0.0) || !std::isfinite(dens)) {
      if (bad_index) *bad_index = static_cast<int>(idx);
      return -std::numeric_limits<double>::infinity();
    }
    ll += std::log(dens);
  }
  return ll;
}

std::vector<AngularSample> make_angular_samples(const Matrix& data,
                                                const PartitionConfig& pc) {
  pc.validate();
  const int n = static_cast<int>(data.rows());
  std::vector<AngularSample> all;
  all.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto [r, w] = pseudo_polar(data.row(i).transpose());
    all.push_back({r, w, classify(w, pc.c)});
  }
  if (pc.r0 > 0.0) {
    std::vector<AngularSample> kept;
    for (auto& s : all)
      if (s.r > pc.r0) kept.push_back(std::move(s));
    return kept;
  }
  const int k = std::min<int>(pc.top_k, n);
  std::partial_sort(all.begin(), all.begin() + k, all.end(),
                    [](const AngularSample& a, const AngularSample& b) {
                      return a.r > b.r;
                    });
  all.resize(k);
  return all;
}

double total_angular_mass(const UnitFrechetV& v, const QmcConfig& cfg,
                          double tol) {
  const int d = v.dim();
  const double nu = v.model().nu;
  double total = 0.0;
  for (int j = 0; j < d; ++j)
    total += vertex_mass(v.model(), v.margins(), j, cfg);
  if (d == 2) {
    total += integrate_01_power(
        [&](double t) {
          Vector w(2);
          w << t, 1.0 - t;
          return v.interior_density(w);
        },
        nu, 0.1 * tol);
    return total;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) total += edge_mass(v, i, j, 0.1 * tol);
  total += simplex_integral(
      [&](double w1, double w2) {
        Vector w(3);
        w << w1, w2, 1.0 - w1 - w2;
        return v.interior_density(w);
      },
      nu, tol);
  return total;
}

Vector angular_moments(const UnitFrechetV& v, const QmcConfig& cfg,
                       double tol) {
  const int d = v.dim();
  const double nu = v.model().nu;
  Vector mom = Vector::Zero(d);
  for (int j = 0; j < d; ++j)
    mom(j) += vertex_mass(v.model(), v.margins(), j, cfg);
  if (d == 2) {
    for (int j = 0; j < 2; ++j) {
      mom(j) += integrate_01_power(
          [&](double t) {
            Vector w(2);
            w << t, 1.0 - t;
            return w(j) * v.interior_density(w);
          },
          nu, 0.1 * tol);
    }
    return mom;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double mi = integrate_01_power(
          [&](double t) { return t * v.edge_density(i, j, t); }, nu,
          0.1 * tol);
      const double mj = integrate_01_power(
          [&](double t) { return (1.0 - t) * v.edge_density(i, j, t); }, nu,
          0.1 * tol);
      mom(i) += mi;
      mom(j) += mj;
    }
  for (int j = 0; j < 3; ++j) {
    mom(j) += simplex_integral(
        [&](double w1, double w2) {
          Vector w(3);
          w << w1, w2, 1.0 - w1 - w2;
          return w(j) * v.interior_density(w);
        },
        nu, tol);
  }
  return mom;
}

}  // namespace extskewt
