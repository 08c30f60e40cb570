#include "extskewt/extdep.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "extskewt/special.hpp"

namespace extskewt {

void ExtDepModel::validate() const {
  const int d = dim();
  if (d < 1) throw std::domain_error("ExtDepModel: dimension must be >= 1");
  if (corr.rows() != d || corr.cols() != d)
    throw std::domain_error("ExtDepModel: dimension mismatch");
  if (!(nu > 0.0)) throw std::domain_error("ExtDepModel: nu must be positive");
  CorrelationMatrix check(corr);  // unit diagonal, symmetry, PD
}

MarginDerived margin_derived(const ExtDepModel& model) {
  model.validate();
  const int d = model.dim();
  MarginDerived md;
  md.corr_circ.resize(d);
  md.alpha_circ.resize(d);
  md.tau_circ.resize(d);
  md.kappa_circ.resize(d);
  md.alpha_star.resize(d);
  md.tau_star.resize(d);
  md.m_plus.resize(d);

  const double q_all = model.alpha.dot(model.corr * model.alpha);
  const double shared_norm = norm_cdf(model.tau / std::sqrt(1.0 + q_all));
  const double mom_c = std::pow(2.0, 0.5 * (model.nu - 2.0)) *
                       std::exp(std::lgamma(0.5 * (model.nu + 1.0))) /
                       std::sqrt(pi);

  for (int j = 0; j < d; ++j) {
    std::vector<int> rest;
    for (int i = 0; i < d; ++i)
      if (i != j) rest.push_back(i);
    const int m = d - 1;
    Matrix s(m, m);
    Vector rj(m), a_rest(m);
    for (int a = 0; a < m; ++a) {
      rj(a) = model.corr(rest[a], j);
      a_rest(a) = model.alpha(rest[a]);
      for (int b = 0; b < m; ++b)
        s(a, b) = model.corr(rest[a], rest[b]) -
                  model.corr(rest[a], j) * model.corr(j, rest[b]);
    }
    Vector w(m);
    for (int a = 0; a < m; ++a) w(a) = std::sqrt(s(a, a));
    Matrix cc(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) cc(a, b) = s(a, b) / (w(a) * w(b));
    const double q_j = (m > 0) ? a_rest.dot(s * a_rest) : 0.0;

    md.corr_circ[j] = cc;
    md.alpha_circ[j] = (w.array() * a_rest.array()).matrix();
    md.tau_circ(j) =
        (((m > 0) ? rj.dot(a_rest) : 0.0) + model.alpha(j)) *
        std::sqrt(model.nu + 1.0);
    md.kappa_circ(j) = -model.tau / std::sqrt(1.0 + q_j);
    md.alpha_star(j) =
        (model.alpha(j) + ((m > 0) ? rj.dot(a_rest) : 0.0)) /
        std::sqrt(1.0 + q_j);
    md.tau_star(j) = model.tau / std::sqrt(1.0 + q_j);
    md.m_plus(j) =
        mom_c *
        nct_cdf(md.alpha_star(j) * std::sqrt(model.nu + 1.0), -md.tau_star(j),
                model.nu + 1.0) /
        shared_norm;
  }
  return md;
}

namespace {

// conditioning argument of the j-th term of the exponent function
Vector exponent_arg(const ExtDepModel& model, const Vector& x_scaled, int j) {
  const int d = model.dim();
  Vector u(d - 1);
  int k = 0;
  for (int i = 0; i < d; ++i) {
    if (i == j) continue;
    const double w = model.corr(i, j);
    u(k++) = std::sqrt((model.nu + 1.0) / (1.0 - w * w)) *
             (x_scaled(i) / x_scaled(j) - w);
  }
  return u;
}

void check_x(const Vector& x) {
  for (int i = 0; i < x.size(); ++i)
    if (!(x(i) > 0.0)) throw std::domain_error("exponent: x must be positive");
}

}  // namespace

ValueWithError exponent_V(const ExtDepModel& model, const MarginDerived& md,
                          const Vector& x, const QmcConfig& cfg) {
  const int d = model.dim();
  if (x.size() != d) throw std::domain_error("exponent_V: dimension mismatch");
  check_x(x);
  if (d == 1) return {std::pow(x(0), -model.nu), 0.0};

  Vector xs(d);
  for (int i = 0; i < d; ++i)
    xs(i) = x(i) * std::pow(md.m_plus(i), 1.0 / model.nu);

  double v = 0.0, err2 = 0.0;
  for (int j = 0; j < d; ++j) {
    SkewTParams p;
    p.mu = Vector::Zero(d - 1);
    p.omega = md.corr_circ[j];
    p.alpha = md.alpha_circ[j];
    p.tau = md.tau_circ(j);
    p.kappa = md.kappa_circ(j);
    p.nu = model.nu + 1.0;
    const ProbResult pj = ncest_cdf(exponent_arg(model, xs, j), p, cfg);
    const double wj = std::pow(x(j), -model.nu);
    v += wj * pj.value;
    err2 += wj * wj * pj.error * pj.error;
  }
  return {v, std::sqrt(err2)};
}

ValueWithError exponent_V(const ExtDepModel& model, const Vector& x,
                          const QmcConfig& cfg) {
  return exponent_V(model, margin_derived(model), x, cfg);
}

ValueWithError exponent_extremal_t(const ExtDepModel& model, const Vector& x,
                                   const QmcConfig& cfg) {
  model.validate();
  if (model.alpha.norm() != 0.0 || model.tau != 0.0)
    throw std::domain_error("exponent_extremal_t: needs alpha = 0, tau = 0");
  const int d = model.dim();
  if (x.size() != d)
    throw std::domain_error("exponent_extremal_t: dimension mismatch");
  check_x(x);
  if (d == 1) return {std::pow(x(0), -model.nu), 0.0};

  double v = 0.0, err2 = 0.0;
  for (int j = 0; j < d; ++j) {
    std::vector<int> rest;
    for (int i = 0; i < d; ++i)
      if (i != j) rest.push_back(i);
    const int m = d - 1;
    Matrix s(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        s(a, b) = model.corr(rest[a], rest[b]) -
                  model.corr(rest[a], j) * model.corr(j, rest[b]);
    Matrix cc(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        cc(a, b) = s(a, b) / std::sqrt(s(a, a) * s(b, b));
    const ProbResult pj =
        mvt_cdf(exponent_arg(model, x, j), CorrelationMatrix(cc),
                Vector::Zero(m), model.nu + 1.0, cfg);
    const double wj = std::pow(x(j), -model.nu);
    v += wj * pj.value;
    err2 += wj * wj * pj.error * pj.error;
  }
  return {v, std::sqrt(err2)};
}

namespace {

// tail constant L(infinity; alpha*, tau*, kappa*, nu) of a non-central
// extended skew-t margin on the standardized scale
double tail_slowly_varying(double a_star, double t_star, double k_star,
                           double nu) {
  const double s = std::sqrt(1.0 + a_star * a_star);
  const double numer = nct_cdf(a_star * std::sqrt(nu + 1.0), k_star, nu + 1.0);
  const double denom = nct_cdf(t_star / s, k_star / s, nu);
  return std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) *
         std::pow(nu, 0.5 * (nu - 2.0)) * numer / (std::sqrt(pi) * denom);
}

struct SkewTMargins {
  Vector a_star, t_star, k_star;
};

SkewTMargins skewt_margins(const Matrix& corr, const Vector& alpha, double tau,
                           double kappa) {
  const int d = static_cast<int>(alpha.size());
  SkewTMargins out;
  out.a_star.resize(d);
  out.t_star.resize(d);
  out.k_star.resize(d);
  for (int j = 0; j < d; ++j) {
    std::vector<int> rest;
    for (int i = 0; i < d; ++i)
      if (i != j) rest.push_back(i);
    const int m = d - 1;
    Vector rj(m), a_rest(m);
    Matrix s(m, m);
    for (int a = 0; a < m; ++a) {
      rj(a) = corr(rest[a], j);
      a_rest(a) = alpha(rest[a]);
      for (int b = 0; b < m; ++b)
        s(a, b) = corr(rest[a], rest[b]) - corr(rest[a], j) * corr(j, rest[b]);
    }
    const double q = (m > 0) ? a_rest.dot(s * a_rest) : 0.0;
    const double sc = std::sqrt(1.0 + q);
    out.a_star(j) = (alpha(j) + ((m > 0) ? rj.dot(a_rest) : 0.0)) / sc;
    out.t_star(j) = tau / sc;
    out.k_star(j) = kappa / sc;
  }
  return out;
}

}  // namespace

ValueWithError exponent_skewt_limit(const Matrix& corr, const Vector& alpha,
                                    double tau, double kappa, double nu,
                                    const Vector& x, const QmcConfig& cfg) {
  const int d = static_cast<int>(alpha.size());
  if (x.size() != d)
    throw std::domain_error("exponent_skewt_limit: dimension mismatch");
  check_x(x);
  ExtDepModel model{corr, alpha, 0.0, nu};
  model.validate();
  if (d == 1) return {std::pow(x(0), -nu), 0.0};

  const SkewTMargins mg = skewt_margins(corr, alpha, tau, kappa);
  Vector xs(d);
  for (int i = 0; i < d; ++i) {
    const double li =
        tail_slowly_varying(mg.a_star(i), mg.t_star(i), mg.k_star(i), nu);
    xs(i) = x(i) * std::pow(li, 1.0 / nu);
  }

  const MarginDerived md = margin_derived(model);  // tau=0: central circ params
  double v = 0.0, err2 = 0.0;
  for (int j = 0; j < d; ++j) {
    SkewTParams p;
    p.mu = Vector::Zero(d - 1);
    p.omega = md.corr_circ[j];
    p.alpha = md.alpha_circ[j];
    p.tau = md.tau_circ(j);
    p.kappa = 0.0;
    p.nu = nu + 1.0;
    const ProbResult pj = ncest_cdf(exponent_arg(model, xs, j), p, cfg);
    const double wj = std::pow(x(j), -nu);
    v += wj * pj.value;
    err2 += wj * wj * pj.error * pj.error;
  }
  return {v, std::sqrt(err2)};
}

Vector norming_constants(const Matrix& corr, const Vector& alpha, double tau,
                         double kappa, double nu, double n) {
  if (!(n >= 1.0)) throw std::domain_error("norming_constants: n must be >= 1");
  const int d = static_cast<int>(alpha.size());
  const SkewTMargins mg = skewt_margins(corr, alpha, tau, kappa);
  Vector a(d);
  for (int j = 0; j < d; ++j) {
    const double li =
        tail_slowly_varying(mg.a_star(j), mg.t_star(j), mg.k_star(j), nu);
    a(j) = std::pow(n * li, 1.0 / nu);
  }
  return a;
}

double est_skewt_cdf1(double x, double alpha, double tau, double nu) {
  const double s = std::sqrt(1.0 + alpha * alpha);
  const double dl = alpha / s, tb = tau / s;
  return bvt_cdf(x, tb, -dl, nu) / t_cdf(tb, nu);
}

namespace {

// m+ of a margin in the tau = 0 bivariate construction
double m_plus_pair(double a_star, double nu) {
  return std::pow(2.0, 0.5 * (nu - 2.0)) *
         std::exp(std::lgamma(0.5 * (nu + 1.0))) *
         t_cdf(a_star * std::sqrt(nu + 1.0), nu + 1.0) * 2.0 / std::sqrt(pi);
}

}  // namespace

double bivariate_exponent(double alpha_s, double alpha_sh, double omega,
                          double nu, double x1, double x2) {
  if (!(x1 > 0.0 && x2 > 0.0))
    throw std::domain_error("bivariate_exponent: x must be positive");
  if (std::fabs(omega) >= 1.0)
    throw std::domain_error("bivariate_exponent: |omega(h)| must be < 1");
  const double om2 = 1.0 - omega * omega;
  const double a_star_s =
      (alpha_s + omega * alpha_sh) / std::sqrt(1.0 + alpha_sh * alpha_sh * om2);
  const double a_star_sh =
      (alpha_sh + omega * alpha_s) / std::sqrt(1.0 + alpha_s * alpha_s * om2);
  const double gamma = std::pow(
      m_plus_pair(a_star_sh, nu) / m_plus_pair(a_star_s, nu), 1.0 / nu);
  const double b_scale = std::sqrt((nu + 1.0) / om2);
  const double xr = x2 * gamma / x1;

  const double t1 =
      est_skewt_cdf1(b_scale * (xr - omega), alpha_sh * std::sqrt(om2),
                     (alpha_s + alpha_sh * omega) * std::sqrt(nu + 1.0),
                     nu + 1.0) /
      std::pow(x1, nu);
  const double t2 =
      est_skewt_cdf1(b_scale * (1.0 / xr - omega), alpha_s * std::sqrt(om2),
                     (alpha_sh + alpha_s * omega) * std::sqrt(nu + 1.0),
                     nu + 1.0) /
      std::pow(x2, nu);
  return t1 + t2;
}

double extremal_coefficient(double alpha_s, double alpha_sh, double omega,
                            double nu) {
  if (omega > 1.0 - 1e-12) return 1.0;  // complete dependence limit
  return bivariate_exponent(alpha_s, alpha_sh, omega, nu, 1.0, 1.0);
}

TailDepResult tail_dependence(double omega, double a1, double a2) {
  if (!(omega >= 0.0 && omega < 1.0))
    throw std::domain_error("tail_dependence: omega must be in [0, 1)");
  const double om2 = 1.0 - omega * omega;
  const double as1 = (a1 + omega * a2) / std::sqrt(1.0 + a2 * a2 * om2);
  const double as2 = (a2 + omega * a1) / std::sqrt(1.0 + a1 * a1 * om2);
  const double ab1 = std::sqrt(1.0 + as1 * as1);
  const double ab2 = std::sqrt(1.0 + as2 * as2);

  TailDepResult out;
  if (as1 >= 0.0 && as2 >= 0.0) {
    // case 1: both marginal slants non-negative
    out.case_label = TailDepCase::One;
    out.eta = 0.5 * (1.0 + omega);
    const double c = 2.0 * (1.0 + omega) / (1.0 - omega);
    const double p = -omega / (1.0 + omega);
    out.slowly_varying = [c, p](double x) {
      return c * std::pow(4.0 * pi * std::log(x), p);
    };
    return out;
  }
  if (as1 < 0.0 && as2 < 0.0) {
    // case 3: both marginal slants negative
    out.case_label = TailDepCase::Three;
    const double aj = (a1 <= a2) ? a1 : a2;
    const double ak = (a1 <= a2) ? a2 : a1;
    const double abj = (a1 <= a2) ? ab1 : ab2;
    const double abk = (a1 <= a2) ? ab2 : ab1;
    const double bracket = (ak * ak * om2 + 1.0) / (abk * abk) +
                           (aj * aj * om2 + 1.0) / (abj * abj) +
                           2.0 * (ak * aj * om2 - omega) / (abk * abj);
    out.eta = om2 / bracket;
    const double eta = out.eta;
    const double c =
        -std::pow(2.0, 1.5) * std::sqrt(pi) * std::pow(abj, 1.5) * abk * abk *
        om2 /
        ((ak * abj + aj * abk) * (abj - omega * abk) *
         (1.0 - omega * abj + aj * (aj + ak * abj / abk) * om2));
    out.slowly_varying = [c, eta](double x) {
      return c * std::pow(4.0 * pi * std::log(x), 0.5 / eta - 1.5);
    };
    return out;
  }
  // case 2: exactly one marginal slant negative; j indexes that margin
  const bool neg1 = as1 < 0.0;
  const double aj = neg1 ? a1 : a2;
  const double ak = neg1 ? a2 : a1;
  const double abj = neg1 ? ab1 : ab2;
  const double eta2 = om2 * abj * abj / (om2 + (abj - omega) * (abj - omega));
  const double split = -aj / abj;
  if (ak >= split) {
    out.case_label = TailDepCase::TwoA;
    out.eta = eta2;
    const double eta = out.eta;
    const double c =
        2.0 * abj * abj * om2 / ((abj - omega) * (1.0 - omega * abj));
    out.slowly_varying = [c, eta](double x) {
      return c * std::pow(4.0 * pi * std::log(x), 0.5 / eta - 1.0);
    };
  } else {
    out.case_label = TailDepCase::TwoB;
    const double extra = ak + aj / abj;
    out.eta = 1.0 / (1.0 / eta2 + extra * extra);
    const double eta = out.eta;
    const double c = -std::pow(2.0, 1.5) * std::sqrt(pi) * abj * abj * om2 /
                     (extra * (abj - omega) *
                      (1.0 - omega * abj + aj * (aj + ak * abj) * om2));
    out.slowly_varying = [c, eta](double x) {
      return c * std::pow(4.0 * pi * std::log(x), 0.5 / eta - 1.5);
    };
  }
  return out;
}

// ---------------------------------------------------------------------------

ExtDepModel make_model(const std::vector<Vector>& sites,
                       const PowExpCorrelation& corr_fn,
                       const SlantFunction& alpha_fn, double tau, double nu) {
  if (alpha_fn.kind != SlantFunction::Kind::Alpha)
    throw std::domain_error("make_model: alpha-kind slant required");
  const int d = static_cast<int>(sites.size());
  ExtDepModel model;
  model.corr.resize(d, d);
  model.alpha.resize(d);
  for (int i = 0; i < d; ++i) {
    model.alpha(i) = alpha_fn(sites[i]);
    model.corr(i, i) = 1.0;
    for (int j = 0; j < i; ++j)
      model.corr(i, j) = model.corr(j, i) =
          corr_fn((sites[i] - sites[j]).norm());
  }
  model.tau = tau;
  model.nu = nu;
  return model;
}

/* simulate_maxstable
 * Poisson points R_i = Gamma_i^{-1/nu} paired with independent skew-normal
 * vectors; the running maximum stops once R_i^nu c_bound drops below
 * stopping * min_s { M(s)^nu m+(s) }, so a skipped point could only matter
 * if Y+(s)^nu exceeded c_bound / stopping.
 */
MaxStableResult simulate_maxstable(const ExtDepModel& model, int n_paths,
                                   Rng& rng, const MaxStableOptions& opts) {
  model.validate();
  if (n_paths < 1) throw std::domain_error("simulate_maxstable: n_paths >= 1");
  const int d = model.dim();
  const MarginDerived md = margin_derived(model);
  const double q = model.alpha.dot(model.corr * model.alpha);
  const Vector dl = (model.corr * model.alpha) / std::sqrt(1.0 + q);
  const double tb = model.tau / std::sqrt(1.0 + q);
  const Matrix chol = safe_cholesky(model.corr - dl * dl.transpose());
  const double p_lo = norm_cdf(-tb);
  Vector mp_pow(d);
  for (int i = 0; i < d; ++i)
    mp_pow(i) = std::pow(md.m_plus(i), 1.0 / model.nu);

  MaxStableResult res;
  res.paths.resize(n_paths, d);
  Vector g(d), m(d);
  for (int p = 0; p < n_paths; ++p) {
    double gamma = 0.0;
    m.setZero();
    double min_level = 0.0;  // min_s M(s)^nu m+(s)
    long pts = 0;
    for (; pts < opts.max_spectral_points; ++pts) {
      gamma += rng.exponential();
      const double r_nu = 1.0 / gamma;
      if (r_nu * opts.c_bound < opts.stopping * min_level) break;
      const double r = std::pow(gamma, -1.0 / model.nu);
      const double w = norm_quantile(p_lo + rng.uniform() * (1.0 - p_lo));
      for (int i = 0; i < d; ++i) g(i) = rng.normal();
      const Vector e = chol * g;
      bool changed = false;
      for (int i = 0; i < d; ++i) {
        const double y = dl(i) * w + e(i);
        if (y > 0.0) {
          const double u = r * y / mp_pow(i);
          if (u > m(i)) {
            m(i) = u;
            changed = true;
          }
        }
      }
      if (changed || min_level == 0.0) {
        min_level = std::numeric_limits<double>::infinity();
        for (int i = 0; i < d; ++i)
          min_level =
              std::min(min_level, std::pow(m(i), model.nu) * md.m_plus(i));
      }
    }
    if (pts >= opts.max_spectral_points) ++res.truncated_paths;
    for (int i = 0; i < d; ++i) res.paths(p, i) = m(i);
  }
  return res;
}

std::pair<double, double> empirical_extremal_coefficient(const Matrix& paths,
                                                         int i, int j,
                                                         double nu) {
  const int n = static_cast<int>(paths.rows());
  double mean = 0.0, mean2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double e = std::exp(-std::min(std::pow(paths(k, i), -nu),
                                        std::pow(paths(k, j), -nu)));
    mean += e;
    mean2 += e * e;
  }
  mean /= n;
  mean2 /= n;
  const double var = std::max(mean2 - mean * mean, 0.0);
  const double theta = mean / (1.0 - mean);
  const double se = std::sqrt(var / n) / ((1.0 - mean) * (1.0 - mean));
  return {theta, se};
}

}  // namespace extskewt
