#include "extskewt/skewproc.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "extskewt/special.hpp"

namespace extskewt {

SlantFunction constant_slant(double value, SlantFunction::Kind kind) {
  return {kind, [value](const Vector&) { return value; }};
}

SlantFunction slant_sin(double a, double b) {
  return {SlantFunction::Kind::Delta,
          [a, b](const Vector& s) { return a * std::sin(b * s(0)); }};
}

SlantFunction slant_sincos(double a, double b) {
  return {SlantFunction::Kind::Delta, [a, b](const Vector& s) {
            return a * a * std::sin(b * s(0)) * std::cos(b * s(0));
          }};
}

void PowExpCorrelation::validate() const {
  if (!(lambda > 0.0))
    throw std::domain_error("PowExpCorrelation: lambda must be positive");
  if (!(xi > 0.0 && xi <= 2.0))
    throw std::domain_error("PowExpCorrelation: xi must be in (0, 2]");
}

double PowExpCorrelation::operator()(double h) const {
  if (h <= 0.0) return 1.0;
  return std::exp(-std::pow(h / lambda, xi));
}

void ProcessSpec::validate() const {
  correlation.validate();
  if (sites.empty()) throw std::domain_error("ProcessSpec: no sites");
  for (size_t i = 0; i < sites.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if ((sites[i] - sites[j]).norm() < 1e-14)
        throw std::domain_error("ProcessSpec: sites must be distinct");
  if (slant.kind == SlantFunction::Kind::Delta) {
    for (const Vector& s : sites)
      if (std::fabs(slant(s)) >= 1.0)
        throw std::domain_error("ProcessSpec: |delta(s)| must be < 1");
  }
}

Matrix ProcessSpec::base_correlation() const {
  const int d = dim();
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    m(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      m(i, j) = m(j, i) = correlation((sites[i] - sites[j]).norm());
    }
  }
  return m;
}

Matrix safe_cholesky(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Matrix jittered = m;
  jittered.diagonal().array() += 1e-10;
  Eigen::LLT<Matrix> retry(jittered);
  if (retry.info() != Eigen::Success)
    throw std::runtime_error("safe_cholesky: matrix not positive definite");
  return retry.matrixL();
}

FiniteDimParams finite_dim_params(const ProcessSpec& spec) {
  spec.validate();
  if (spec.construction != ProcessSpec::Construction::Additive ||
      spec.slant.kind != SlantFunction::Kind::Delta)
    throw std::domain_error(
        "finite_dim_params: needs the additive construction with a delta "
        "slant");
  const int d = spec.dim();
  const Matrix sigma = spec.base_correlation();
  Vector delta(d), dd(d), u(d);
  for (int i = 0; i < d; ++i) {
    delta(i) = spec.slant(spec.sites[i]);
    dd(i) = std::sqrt(1.0 - delta(i) * delta(i));
    u(i) = delta(i) / dd(i);
  }
  Matrix corr = sigma + u * u.transpose();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) corr(i, j) *= dd(i) * dd(j);

  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("finite_dim_params: base correlation not PD");
  const Vector siu = llt.solve(u);
  const double scale = 1.0 / std::sqrt(1.0 + u.dot(siu));
  Vector alpha(d);
  for (int i = 0; i < d; ++i) alpha(i) = scale * siu(i) / dd(i);

  const double q = alpha.dot(corr * alpha);
  const double tau = std::sqrt(1.0 + q) * spec.extension;
  return {corr, alpha, tau};
}

namespace {

double mills(double eps) { return norm_pdf(eps) / norm_cdf(eps); }

double r_const(double eps) {
  const double m = mills(eps);
  return m * (eps + m);
}

}  // namespace

double mean_function(const ProcessSpec& spec, const Vector& s) {
  if (spec.slant.kind != SlantFunction::Kind::Delta)
    throw std::domain_error("mean_function: delta slant required");
  return spec.slant(s) * mills(spec.extension);
}

double covariance_function(const ProcessSpec& spec, const Vector& s,
                           const Vector& h) {
  if (spec.slant.kind != SlantFunction::Kind::Delta)
    throw std::domain_error("covariance_function: delta slant required");
  const double ds = spec.slant(s), dsh = spec.slant(s + h);
  const double rho = spec.correlation(h.norm());
  const double r = r_const(spec.extension);
  return rho * std::sqrt((1.0 - ds * ds) * (1.0 - dsh * dsh)) +
         ds * dsh * (1.0 - r);
}

double ns_correlation(const ProcessSpec& spec, const Vector& s,
                      const Vector& h) {
  const double c = covariance_function(spec, s, h);
  const double r = r_const(spec.extension);
  const double ds = spec.slant(s), dsh = spec.slant(s + h);
  const double v0 = 1.0 - r * ds * ds;    // c_s(0)
  const double v1 = 1.0 - r * dsh * dsh;  // c_{s+h}(0)
  if (v0 <= 0.0 || v1 <= 0.0)
    throw std::runtime_error("ns_correlation: nonpositive variance");
  return c / std::sqrt(v0 * v1);
}

double variogram(const ProcessSpec& spec, const Vector& s, const Vector& h) {
  const double c = covariance_function(spec, s, h);
  const double r = r_const(spec.extension);
  const double ds = spec.slant(s), dsh = spec.slant(s + h);
  return 2.0 * (1.0 - c - 0.5 * r * (dsh * dsh + ds * ds));
}

/* simulate_additive
 * Per path: a Gaussian field draw X (d normals through the Cholesky factor),
 * then one uniform for the shared truncated variable X'' = (X' | X'+eps > 0).
 */
Matrix simulate_additive(const ProcessSpec& spec, int n_paths, Rng& rng) {
  spec.validate();
  if (spec.slant.kind != SlantFunction::Kind::Delta)
    throw std::domain_error("simulate_additive: delta slant required");
  if (n_paths < 1) throw std::domain_error("simulate_additive: n_paths >= 1");
  const int d = spec.dim();
  const Matrix chol = safe_cholesky(spec.base_correlation());
  Vector delta(d);
  for (int i = 0; i < d; ++i) delta(i) = spec.slant(spec.sites[i]);
  const double p_lo = norm_cdf(-spec.extension);

  Matrix out(n_paths, d);
  Vector g(d);
  for (int p = 0; p < n_paths; ++p) {
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    const Vector x = chol * g;
    const double xpp = norm_quantile(p_lo + rng.uniform() * (1.0 - p_lo));
    for (int i = 0; i < d; ++i)
      out(p, i) = std::sqrt(1.0 - delta(i) * delta(i)) * x(i) + delta(i) * xpp;
  }
  return out;
}

Matrix sn_sample(const Matrix& corr, const Vector& alpha, double tau, int n,
                 Rng& rng) {
  const int d = static_cast<int>(alpha.size());
  const double q = alpha.dot(corr * alpha);
  const Vector dl = (corr * alpha) / std::sqrt(1.0 + q);
  const double tb = tau / std::sqrt(1.0 + q);
  const Matrix resid = corr - dl * dl.transpose();
  const Matrix chol = safe_cholesky(resid);
  const double p_lo = norm_cdf(-tb);

  Matrix out(n, d);
  Vector g(d);
  for (int p = 0; p < n; ++p) {
    const double w = norm_quantile(p_lo + rng.uniform() * (1.0 - p_lo));
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    const Vector e = chol * g;
    for (int i = 0; i < d; ++i) out(p, i) = dl(i) * w + e(i);
  }
  return out;
}

/* simulate_conditioning
 * tau = 0 uses the sign-flip scheme of the conditioning construction; the
 * flip is exact only there, so nonzero tau routes through the acceptance-free
 * truncated-variable sampler with alpha = (alpha(s_1), ..., alpha(s_d)).
 */
Matrix simulate_conditioning(const ProcessSpec& spec, int n_paths, Rng& rng) {
  spec.validate();
  if (spec.slant.kind != SlantFunction::Kind::Alpha)
    throw std::domain_error("simulate_conditioning: alpha slant required");
  if (n_paths < 1)
    throw std::domain_error("simulate_conditioning: n_paths >= 1");
  const int d = spec.dim();
  const Matrix corr = spec.base_correlation();
  Vector alpha(d);
  for (int i = 0; i < d; ++i) alpha(i) = spec.slant(spec.sites[i]);
  if (spec.extension != 0.0)
    return sn_sample(corr, alpha, spec.extension, n_paths, rng);

  const Matrix chol = safe_cholesky(corr);
  Matrix out(n_paths, d);
  Vector g(d);
  for (int p = 0; p < n_paths; ++p) {
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    const Vector x = chol * g;
    const double xp = rng.normal();
    const double sign = (alpha.dot(x) > xp) ? 1.0 : -1.0;
    for (int i = 0; i < d; ++i) out(p, i) = sign * x(i);
  }
  return out;
}

double esn_cdf1(double z, double alpha, double tau) {
  const double q = 1.0 + alpha * alpha;
  const double tb = tau / std::sqrt(q);
  const double dl = alpha / std::sqrt(q);
  return bvn_cdf(z, tb, -dl) / norm_cdf(tb);
}

ProcessSpec process_preset(int row, int n_sites) {
  if (row < 1 || row > 4)
    throw std::domain_error("process_preset: row in 1..4");
  if (n_sites < 2) throw std::domain_error("process_preset: n_sites >= 2");
  ProcessSpec spec;
  spec.correlation = {0.3, 1.5};
  spec.extension = 0.0;
  spec.construction = ProcessSpec::Construction::Additive;
  switch (row) {
    case 1: spec.slant = slant_sin(0.95, 0.0); break;
    case 2: spec.slant = slant_sin(0.95, 1.0); break;
    case 3: spec.slant = slant_sin(0.95, 3.0); break;
    default: spec.slant = slant_sincos(1.3, 0.9); break;
  }
  for (int i = 0; i < n_sites; ++i) {
    Vector s(1);
    s(0) = static_cast<double>(i) / (n_sites - 1);
    spec.sites.push_back(s);
  }
  return spec;
}

}  // namespace extskewt
