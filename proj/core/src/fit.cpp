#include "extskewt/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "extskewt/special.hpp"

namespace extskewt {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

void CompositeSpec::validate() const {
  if (order != 2 && order != 3)
    throw std::domain_error("CompositeSpec: order must be 2 or 3");
  if (n_sites < 2) throw std::domain_error("CompositeSpec: n_sites >= 2");
  if (param == Param::PowExp && static_cast<int>(sites.size()) != n_sites)
    throw std::domain_error("CompositeSpec: PowExp needs site coordinates");
  if (tuples.empty()) throw std::domain_error("CompositeSpec: no tuples");
  for (const auto& t : tuples) {
    if (static_cast<int>(t.size()) != order)
      throw std::domain_error("CompositeSpec: tuple size != order");
    for (int i : t)
      if (i < 0 || i >= n_sites)
        throw std::domain_error("CompositeSpec: tuple index out of range");
  }
}

int CompositeSpec::n_free() const {
  int p = (param == Param::FreeCorr) ? n_sites * (n_sites - 1) / 2 : 2;
  if (skew) p += n_sites;
  if (!fix_nu) p += 1;
  return p;
}

ExtDepModel CompositeSpec::build(const Vector& theta) const {
  if (theta.size() != n_free())
    throw std::domain_error("CompositeSpec: parameter size mismatch");
  ExtDepModel m;
  m.corr = Matrix::Identity(n_sites, n_sites);
  int pos = 0;
  if (param == Param::FreeCorr) {
    for (int i = 0; i < n_sites; ++i)
      for (int j = i + 1; j < n_sites; ++j)
        m.corr(i, j) = m.corr(j, i) = std::tanh(theta(pos++));
  } else {
    const double lambda = std::exp(theta(pos++));
    const double xi = 2.0 / (1.0 + std::exp(-theta(pos++)));
    const PowExpCorrelation rho{lambda, xi};
    for (int i = 0; i < n_sites; ++i)
      for (int j = i + 1; j < n_sites; ++j)
        m.corr(i, j) = m.corr(j, i) = rho((sites[i] - sites[j]).norm());
  }
  m.alpha = Vector::Zero(n_sites);
  if (skew)
    for (int i = 0; i < n_sites; ++i) m.alpha(i) = theta(pos++);
  m.tau = 0.0;
  m.nu = fix_nu ? nu_fixed : std::exp(theta(pos++));
  return m;
}

Vector CompositeSpec::natural(const Vector& theta) const {
  Vector out(theta.size());
  int pos = 0;
  if (param == Param::FreeCorr) {
    const int nc = n_sites * (n_sites - 1) / 2;
    for (int i = 0; i < nc; ++i, ++pos) out(pos) = std::tanh(theta(pos));
  } else {
    out(pos) = std::exp(theta(pos));
    ++pos;
    out(pos) = 2.0 / (1.0 + std::exp(-theta(pos)));
    ++pos;
  }
  if (skew)
    for (int i = 0; i < n_sites; ++i, ++pos) out(pos) = theta(pos);
  if (!fix_nu) out(pos) = std::exp(theta(pos));
  return out;
}

std::vector<std::string> CompositeSpec::param_names() const {
  std::vector<std::string> names;
  if (param == Param::FreeCorr) {
    for (int i = 0; i < n_sites; ++i)
      for (int j = i + 1; j < n_sites; ++j)
        names.push_back("omega_" + std::to_string(i + 1) + "_" +
                        std::to_string(j + 1));
  } else {
    names.push_back("lambda");
    names.push_back("xi");
  }
  if (skew)
    for (int i = 0; i < n_sites; ++i)
      names.push_back("alpha_" + std::to_string(i + 1));
  if (!fix_nu) names.push_back("nu");
  return names;
}

std::vector<std::vector<int>> CompositeSpec::all_tuples(int d, int m) {
  std::vector<std::vector<int>> out;
  if (m == 2) {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) out.push_back({i, j});
  } else {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = j + 1; k < d; ++k) out.push_back({i, j, k});
  }
  return out;
}

// ---------------------------------------------------------------------------

double density_d2(const UnitFrechetV& v, const Vector& x) {
  const UnitFrechetV::Derivs dv = v.derivs(x);
  return (dv.grad(0) * dv.grad(1) - dv.v12) * std::exp(-dv.v);
}

double density_d3(const UnitFrechetV& v, const Vector& x) {
  const UnitFrechetV::Derivs dv = v.derivs(x);
  const double poly = -dv.v123 + dv.grad(0) * dv.v23 + dv.grad(1) * dv.v13 +
                      dv.grad(2) * dv.v12 -
                      dv.grad(0) * dv.grad(1) * dv.grad(2);
  return poly * std::exp(-dv.v);
}

double density_d2(const ExtDepModel& model, const Vector& x,
                  const QmcConfig& cfg) {
  (void)cfg;
  return density_d2(UnitFrechetV(model), x);
}

double density_d3(const ExtDepModel& model, const Vector& x,
                  const QmcConfig& cfg) {
  (void)cfg;
  return density_d3(UnitFrechetV(model), x);
}

namespace {

ExtDepModel submodel(const ExtDepModel& m, const std::vector<int>& idx) {
  const int k = static_cast<int>(idx.size());
  ExtDepModel out;
  out.corr.resize(k, k);
  out.alpha.resize(k);
  for (int a = 0; a < k; ++a) {
    out.alpha(a) = m.alpha(idx[a]);
    for (int b = 0; b < k; ++b) out.corr(a, b) = m.corr(idx[a], idx[b]);
  }
  out.tau = m.tau;
  out.nu = m.nu;
  return out;
}

}  // namespace

Vector composite_loglik_terms(const CompositeSpec& spec, const Matrix& data,
                              const Vector& theta) {
  spec.validate();
  if (data.cols() != spec.n_sites)
    throw std::domain_error("composite_loglik: data width != n_sites");
  const ExtDepModel full = spec.build(theta);

  std::vector<UnitFrechetV> views;
  views.reserve(spec.tuples.size());
  for (const auto& t : spec.tuples) views.emplace_back(submodel(full, t));

  const int n = static_cast<int>(data.rows());
  Vector terms = Vector::Zero(n);
  Vector x(spec.order);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (size_t k = 0; k < spec.tuples.size(); ++k) {
      bool ok = true;
      for (int a = 0; a < spec.order; ++a) {
        x(a) = data(i, spec.tuples[k][a]);
        if (!std::isfinite(x(a)) || x(a) <= 0.0) ok = false;
      }
      if (!ok) continue;  // tuple-wise deletion
      const double f = (spec.order == 2) ? density_d2(views[k], x)
                                         : density_d3(views[k], x);
      if (!(f > 0.0) || !std::isfinite(f)) {
        s = neg_inf;
        break;
      }
      s += std::log(f);
    }
    terms(i) = s;
  }
  return terms;
}

double composite_loglik(const CompositeSpec& spec, const Matrix& data,
                        const Vector& theta) {
  return composite_loglik_terms(spec, data, theta).sum();
}

// ---------------------------------------------------------------------------

namespace {

struct Simplex {
  std::vector<Vector> pts;
  std::vector<double> vals;  // objective values (to maximise)
};

void sort_simplex(Simplex& s) {
  std::vector<int> idx(s.pts.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return s.vals[a] > s.vals[b]; });
  Simplex out;
  for (int i : idx) {
    out.pts.push_back(s.pts[i]);
    out.vals.push_back(s.vals[i]);
  }
  s = std::move(out);
}

}  // namespace

OptimResult maximize(const std::function<double(const Vector&)>& objective,
                     const Vector& theta0, int max_iter, double f_tol,
                     double x_tol) {
  const int p = static_cast<int>(theta0.size());
  OptimResult res;
  res.theta = theta0;
  res.value = objective(theta0);
  if (!std::isfinite(res.value))
    throw std::domain_error("maximize: objective not finite at theta0");
  res.trace.push_back(res.value);

  double scale = 0.25;
  int evals = 1;
  for (int restart = 0; restart < 6 && evals < max_iter; ++restart) {
    Simplex s;
    s.pts.push_back(res.theta);
    s.vals.push_back(res.value);
    for (int i = 0; i < p; ++i) {
      Vector v = res.theta;
      v(i) += scale * std::max(1.0, std::fabs(v(i)));
      s.pts.push_back(v);
      double fv = objective(v);
      if (!std::isfinite(fv)) fv = -1e300;
      s.vals.push_back(fv);
      ++evals;
    }
    sort_simplex(s);

    while (evals < max_iter) {
      // convergence on the current simplex
      const double f_spread = s.vals.front() - s.vals.back();
      double x_spread = 0.0;
      for (int i = 1; i <= p; ++i)
        x_spread = std::max(x_spread, (s.pts[i] - s.pts[0]).norm());
      if (f_spread < f_tol && x_spread < x_tol) break;

      Vector centroid = Vector::Zero(p);
      for (int i = 0; i < p; ++i) centroid += s.pts[i];
      centroid /= p;
      const Vector& worst = s.pts[p];

      auto eval = [&](const Vector& v) {
        ++evals;
        const double f = objective(v);
        return std::isfinite(f) ? f : -1e300;
      };
      const Vector xr = centroid + (centroid - worst);
      const double fr = eval(xr);
      if (fr > s.vals[0]) {
        const Vector xe = centroid + 2.0 * (centroid - worst);
        const double fe = eval(xe);
        if (fe > fr) {
          s.pts[p] = xe;
          s.vals[p] = fe;
        } else {
          s.pts[p] = xr;
          s.vals[p] = fr;
        }
      } else if (fr > s.vals[p - 1]) {
        s.pts[p] = xr;
        s.vals[p] = fr;
      } else {
        const Vector xc = centroid + 0.5 * ((fr > s.vals[p] ? xr : worst) - centroid);
        const double fc = eval(xc);
        if (fc > std::max(fr, s.vals[p])) {
          s.pts[p] = xc;
          s.vals[p] = fc;
        } else {
          for (int i = 1; i <= p; ++i) {
            s.pts[i] = s.pts[0] + 0.5 * (s.pts[i] - s.pts[0]);
            s.vals[i] = eval(s.pts[i]);
          }
        }
      }
      sort_simplex(s);
      if (s.vals[0] > res.value) {
        res.value = s.vals[0];
        res.theta = s.pts[0];
        res.trace.push_back(res.value);
      }
    }
    ++res.restarts;
    const bool improved =
        res.trace.size() >= 2 &&
        res.trace.back() - res.trace[res.trace.size() - 2] > 1e-10;
    if (restart > 0 && !improved) {
      res.converged = true;
      break;
    }
    scale *= 0.2;  // fresh, tighter simplex around the incumbent
  }
  res.iterations = evals;
  if (evals >= max_iter) res.converged = false;
  return res;
}

namespace {

// golden-section maximisation on [lo, hi]
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double tol, double* fbest) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  if (fbest) *fbest = f(x);
  return x;
}

}  // namespace

OptimResult maximize_profile(
    const std::function<double(const Vector&, double)>& objective,
    const Vector& theta0, double nuisance0, double nuisance_lo,
    double nuisance_hi, int max_iter) {
  double nuisance_best = nuisance0;
  auto prof = [&](const Vector& th) {
    double fb;
    nuisance_best =
        golden_max([&](double nu) { return objective(th, nu); }, nuisance_lo,
                   nuisance_hi, 1e-4 * (nuisance_hi - nuisance_lo), &fb);
    return fb;
  };
  OptimResult res = maximize(prof, theta0, max_iter);
  // append the profiled nuisance value
  Vector full(theta0.size() + 1);
  full.head(theta0.size()) = res.theta;
  prof(res.theta);
  full(theta0.size()) = nuisance_best;
  res.theta = full;
  return res;
}

// ---------------------------------------------------------------------------

FitResult clic_fit(const CompositeSpec& spec, const Matrix& data,
                   const OptimResult& opt) {
  const int p = static_cast<int>(opt.theta.size());
  const int n = static_cast<int>(data.rows());
  const Vector& th = opt.theta;

  auto terms = [&](const Vector& t) {
    return composite_loglik_terms(spec, data, t);
  };

  // per-observation scores by central differences
  Matrix scores(n, p);
  Vector step(p);
  for (int k = 0; k < p; ++k) step(k) = 1e-5 * std::max(1.0, std::fabs(th(k)));
  for (int k = 0; k < p; ++k) {
    Vector tp = th, tm = th;
    tp(k) += step(k);
    tm(k) -= step(k);
    scores.col(k) = (terms(tp) - terms(tm)) / (2.0 * step(k));
  }
  // empirical covariance of the per-observation scores
  const Vector sbar = scores.colwise().mean();
  scores.rowwise() -= sbar.transpose();
  Matrix j_hat = scores.transpose() * scores;

  // Hessian of the negative log-likelihood by central differences
  const double f0 = composite_loglik(spec, data, th);
  Matrix h_hat(p, p);
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      double val;
      if (a == b) {
        Vector tp = th, tm = th;
        tp(a) += step(a);
        tm(a) -= step(a);
        val = (composite_loglik(spec, data, tp) - 2.0 * f0 +
               composite_loglik(spec, data, tm)) /
              (step(a) * step(a));
      } else {
        Vector tpp = th, tpm = th, tmp = th, tmm = th;
        tpp(a) += step(a);
        tpp(b) += step(b);
        tpm(a) += step(a);
        tpm(b) -= step(b);
        tmp(a) -= step(a);
        tmp(b) += step(b);
        tmm(a) -= step(a);
        tmm(b) -= step(b);
        val = (composite_loglik(spec, data, tpp) -
               composite_loglik(spec, data, tpm) -
               composite_loglik(spec, data, tmp) +
               composite_loglik(spec, data, tmm)) /
              (4.0 * step(a) * step(b));
      }
      h_hat(a, b) = h_hat(b, a) = -val;
    }
  }

  FitResult out;
  out.theta_hat = th;
  out.natural = spec.natural(th);
  out.names = spec.param_names();
  out.loglik = f0;
  out.j_hat = j_hat;
  out.h_hat = h_hat;
  out.trace = opt.trace;
  out.converged = opt.converged;

  Matrix h_inv;
  const Eigen::FullPivLU<Matrix> lu(h_hat);
  if (lu.isInvertible()) {
    h_inv = lu.inverse();
  } else {
    // pseudo-inverse fall-back for a singular sensitivity matrix
    Eigen::JacobiSVD<Matrix> svd(h_hat,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector inv_sv = svd.singularValues();
    for (int i = 0; i < p; ++i)
      inv_sv(i) = (inv_sv(i) > 1e-10) ? 1.0 / inv_sv(i) : 0.0;
    h_inv = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
  }
  out.clic = -2.0 * (f0 - (j_hat * h_inv).trace());

  const Matrix cov = h_inv * j_hat * h_inv;
  // delta method onto the reporting scale
  Matrix jac = Matrix::Zero(p, p);
  for (int k = 0; k < p; ++k) {
    Vector tp = th, tm = th;
    tp(k) += step(k);
    tm(k) -= step(k);
    jac.col(k) = (spec.natural(tp) - spec.natural(tm)) / (2.0 * step(k));
  }
  const Matrix cov_nat = jac * cov * jac.transpose();
  out.std_errors.resize(p);
  for (int k = 0; k < p; ++k)
    out.std_errors(k) = std::sqrt(std::max(cov_nat(k, k), 0.0));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Joint survival probabilities of unit-Frechet margins by inclusion-
// exclusion over sub-model cdfs; sub-model slants come from the Eq.-(5)
// closure and each prepared block is cached across repeated evaluations.
class SurvivalCalc {
 public:
  explicit SurvivalCalc(const ExtDepModel& m3) : m3_(m3) {
    SkewTParams sn;
    sn.mu = Vector::Zero(3);
    sn.omega = m3.corr;
    sn.alpha = m3.alpha;
    sn.tau = m3.tau;
    sn.nu = 1.0;  // the slant closure map is dof-free
    for (int mask = 1; mask < 8; ++mask) {
      std::vector<int> sub;
      for (int b = 0; b < 3; ++b)
        if (mask & (1 << b)) sub.push_back(b);
      if (sub.size() < 2) continue;
      ExtDepModel sm = submodel(m3, sub);
      if (sub.size() < 3) {
        const SkewTParams marg = marginal_params(sn, sub);
        sm.alpha = marg.alpha;
        sm.tau = marg.tau;
      }
      MarginDerived md = margin_derived(sm);
      prepared_[mask] = {std::move(sm), std::move(md)};
    }
  }

  // P(X_i > xyz_i for all i in idx)
  double survival(const std::vector<int>& idx, const Vector& xyz,
                  const QmcConfig& cfg) const {
    const int k = static_cast<int>(idx.size());
    double s = 0.0;
    for (int mask = 0; mask < (1 << k); ++mask) {
      std::vector<int> sub;
      int full_mask = 0;
      for (int b = 0; b < k; ++b)
        if (mask & (1 << b)) {
          sub.push_back(idx[b]);
          full_mask |= 1 << idx[b];
        }
      const int sz = static_cast<int>(sub.size());
      const double sign = (sz % 2 == 0) ? 1.0 : -1.0;
      double g = 1.0;
      if (sz == 1) {
        g = std::exp(-1.0 / xyz(sub[0]));
      } else if (sz >= 2) {
        const auto& [sm, md] = prepared_.at(full_mask);
        Vector x(sz);
        for (int a = 0; a < sz; ++a)
          x(a) = std::pow(xyz(sub[a]), 1.0 / sm.nu);
        g = std::exp(-exponent_V(sm, md, x, cfg).value);
      }
      s += sign * g;
    }
    return std::max(s, 0.0);
  }

 private:
  ExtDepModel m3_;
  std::map<int, std::pair<ExtDepModel, MarginDerived>> prepared_;
};

}  // namespace

double conditional_exceedance(const ExtDepModel& model3, const Vector& xyz,
                              ExceedancePattern pattern, const QmcConfig& cfg) {
  if (model3.dim() != 3 || xyz.size() != 3)
    throw std::domain_error("conditional_exceedance: trivariate only");
  for (int i = 0; i < 3; ++i)
    if (!(xyz(i) > 0.0))
      throw std::domain_error("conditional_exceedance: thresholds > 0");
  const SurvivalCalc calc(model3);
  const double num = calc.survival({0, 1, 2}, xyz, cfg);
  double den;
  if (pattern == ExceedancePattern::XgivenYZ) {
    den = calc.survival({1, 2}, xyz, cfg);
  } else {
    den = calc.survival({2}, xyz, cfg);
  }
  if (!(den > 0.0))
    throw std::domain_error("conditional_exceedance: zero denominator event");
  return num / den;
}

double conditional_return_level(const ExtDepModel& model3, double q,
                                double p_target, ExceedancePattern pattern,
                                const QmcConfig& cfg) {
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("conditional_return_level: q in (0,1)");
  if (!(p_target > 0.0 && p_target <= 1.0))
    throw std::domain_error("conditional_return_level: p_target in (0,1]");
  const double cond_level = -1.0 / std::log(q);  // unit-Frechet quantile
  const SurvivalCalc calc(model3);
  auto prob = [&](double x) {
    Vector xyz(3);
    xyz << x, cond_level, cond_level;
    const double num = calc.survival({0, 1, 2}, xyz, cfg);
    const double den = (pattern == ExceedancePattern::XgivenYZ)
                           ? calc.survival({1, 2}, xyz, cfg)
                           : calc.survival({2}, xyz, cfg);
    if (!(den > 0.0))
      throw std::domain_error("conditional_return_level: zero denominator");
    return num / den;
  };
  double lo = 1e-8;
  if (p_target >= 1.0 || prob(lo) <= p_target) return lo;
  double hi = 1.0;
  while (prob(hi) > p_target) {
    hi *= 10.0;
    if (hi > 1e12)
      throw std::runtime_error("conditional_return_level: no bracket below 1e12");
  }
  // bisection on log x
  double llo = std::log(lo), lhi = std::log(hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (llo + lhi);
    if (prob(std::exp(mid)) > p_target)
      llo = mid;
    else
      lhi = mid;
    if (lhi - llo < 1e-8) break;
  }
  return std::exp(0.5 * (llo + lhi));
}

std::vector<std::pair<double, double>> conditional_return_contour(
    const ExtDepModel& model3, double q, double p_target, int grid_points,
    const QmcConfig& cfg) {
  if (grid_points < 2)
    throw std::domain_error("conditional_return_contour: grid_points >= 2");
  const double cond_level = -1.0 / std::log(q);
  const SurvivalCalc calc(model3);
  const double den_z = 1.0 - std::exp(std::log(q));  // P(Z > z_q) = 1 - q
  auto prob = [&](double x1, double x2) {
    Vector xyz(3);
    xyz << x1, x2, cond_level;
    return calc.survival({0, 1, 2}, xyz, cfg) / den_z;
  };
  std::vector<std::pair<double, double>> contour;
  for (int g = 0; g < grid_points; ++g) {
    const double lx1 = std::log(0.5) + (std::log(200.0) - std::log(0.5)) * g /
                                           (grid_points - 1);
    const double x1 = std::exp(lx1);
    if (prob(x1, 1e-8) < p_target) continue;  // unreachable at this x1
    double llo = std::log(1e-8), lhi = std::log(1.0);
    while (prob(x1, std::exp(lhi)) > p_target && lhi < std::log(1e12))
      lhi += std::log(10.0);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (llo + lhi);
      if (prob(x1, std::exp(mid)) > p_target)
        llo = mid;
      else
        lhi = mid;
    }
    contour.emplace_back(x1, std::exp(0.5 * (llo + lhi)));
  }
  return contour;
}

}  // namespace extskewt
