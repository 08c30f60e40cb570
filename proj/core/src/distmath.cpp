#include "extskewt/distmath.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "extskewt/special.hpp"

namespace extskewt {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
}

CorrelationMatrix::CorrelationMatrix(Matrix m) : m_(std::move(m)) {
  const int d = static_cast<int>(m_.rows());
  if (d < 1 || m_.cols() != d)
    throw std::domain_error("CorrelationMatrix: need a square matrix, d >= 1");
  for (int i = 0; i < d; ++i) {
    if (std::fabs(m_(i, i) - 1.0) > 1e-12)
      throw std::domain_error("CorrelationMatrix: diagonal must be one");
    for (int j = 0; j < i; ++j) {
      if (std::fabs(m_(i, j) - m_(j, i)) > 1e-12)
        throw std::domain_error("CorrelationMatrix: not symmetric");
      if (std::fabs(m_(i, j)) >= 1.0)
        throw std::domain_error("CorrelationMatrix: off-diagonal outside (-1,1)");
    }
  }
  Eigen::LLT<Matrix> llt(m_);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("CorrelationMatrix: not positive definite");
}

void SkewTParams::validate() const {
  const int d = dim();
  if (d < 1) throw std::domain_error("SkewTParams: dimension must be >= 1");
  if (omega.rows() != d || omega.cols() != d || alpha.size() != d)
    throw std::domain_error("SkewTParams: inconsistent dimensions");
  if (!(nu > 0.0)) throw std::domain_error("SkewTParams: nu must be positive");
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("SkewTParams: scale matrix not positive definite");
  const Vector d_vec = delta_vec();
  for (int i = 0; i < d; ++i)
    if (std::fabs(d_vec(i)) > 1.0 - 1e-10)
      throw std::domain_error("SkewTParams: slant is numerically degenerate");
}

Vector SkewTParams::omega_diag_sqrt() const {
  return omega.diagonal().array().sqrt();
}

Matrix SkewTParams::corr() const {
  const Vector w = omega_diag_sqrt();
  Matrix r = omega;
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) r(i, j) /= w(i) * w(j);
  return r;
}

double SkewTParams::q_alpha() const {
  return alpha.dot(corr() * alpha);
}

Vector SkewTParams::delta_vec() const {
  return (corr() * alpha) / std::sqrt(1.0 + q_alpha());
}

double SkewTParams::tau_bar() const { return tau / std::sqrt(1.0 + q_alpha()); }
double SkewTParams::kappa_bar() const {
  return kappa / std::sqrt(1.0 + q_alpha());
}

// ---------------------------------------------------------------------------

namespace {

// Drop +inf coordinates (marginalise), detect -inf (probability zero).
// Returns false if the probability is identically zero.
bool reduce_limits(const Vector& upper, const Matrix& corr, const Vector& nc,
                   Vector& b, Matrix& r, Vector& d) {
  std::vector<int> keep;
  for (int i = 0; i < upper.size(); ++i) {
    if (upper(i) == -inf) return false;
    if (upper(i) != inf) keep.push_back(i);
  }
  const int m = static_cast<int>(keep.size());
  b.resize(m);
  d.resize(m);
  r.resize(m, m);
  for (int i = 0; i < m; ++i) {
    b(i) = upper(keep[i]);
    d(i) = nc(keep[i]);
    for (int j = 0; j < m; ++j) r(i, j) = corr(keep[i], keep[j]);
  }
  return true;
}

}  // namespace

ProbResult mvn_cdf(const Vector& upper, const CorrelationMatrix& corr,
                   const QmcConfig& cfg) {
  cfg.validate();
  const int d = static_cast<int>(upper.size());
  if (d < 1 || corr.dim() != d)
    throw std::domain_error("mvn_cdf: dimension mismatch or d = 0");
  Vector b, nc;
  Matrix r;
  if (!reduce_limits(upper, corr.matrix(), Vector::Zero(d), b, r, nc))
    return {0.0, 0.0, true};
  const int m = static_cast<int>(b.size());
  if (m == 0) return {1.0, 0.0, true};
  switch (m) {
    case 1:
      return {norm_cdf(b(0)), 1e-16, true};
    case 2:
      return {bvn_cdf(b(0), b(1), r(0, 1)), 5e-15, true};
    case 3: {
      const double tol = std::min(1e-10, 0.1 * cfg.target_abs_tol);
      return {tvn_cdf(b(0), b(1), b(2), r(0, 1), r(0, 2), r(1, 2), tol), tol,
              true};
    }
    default:
      return qmc::mvn_rqmc(b, r, cfg);
  }
}

ProbResult mvt_cdf(const Vector& upper, const CorrelationMatrix& corr,
                   const Vector& noncentrality, double nu,
                   const QmcConfig& cfg) {
  cfg.validate();
  if (!(nu > 0.0)) throw std::domain_error("mvt_cdf: nu must be positive");
  const int d = static_cast<int>(upper.size());
  if (d < 1 || corr.dim() != d || noncentrality.size() != d)
    throw std::domain_error("mvt_cdf: dimension mismatch or d = 0");
  Vector b, nc;
  Matrix r;
  if (!reduce_limits(upper, corr.matrix(), noncentrality, b, r, nc))
    return {0.0, 0.0, true};
  const int m = static_cast<int>(b.size());
  if (m == 0) return {1.0, 0.0, true};
  const double tol = std::min(1e-10, 0.1 * cfg.target_abs_tol);
  switch (m) {
    case 1:
      return {nct_cdf(b(0), nc(0), nu), 1e-12, true};
    case 2: {
      const double v = chi_mixture(
          [&](double s) {
            return bvn_cdf(b(0) * s - nc(0), b(1) * s - nc(1), r(0, 1));
          },
          nu, tol);
      return {v, tol, true};
    }
    case 3: {
      const double v = chi_mixture(
          [&](double s) {
            return tvn_cdf(b(0) * s - nc(0), b(1) * s - nc(1), b(2) * s - nc(2),
                           r(0, 1), r(0, 2), r(1, 2), 0.05 * tol);
          },
          nu, tol);
      return {v, tol, true};
    }
    default:
      return qmc::mvt_rqmc(b, r, nc, nu, cfg);
  }
}

ProbResult mvt_cdf_qmc(const Vector& upper, const CorrelationMatrix& corr,
                       const Vector& noncentrality, double nu,
                       const QmcConfig& cfg) {
  cfg.validate();
  if (!(nu > 0.0)) throw std::domain_error("mvt_cdf_qmc: nu must be positive");
  Vector b, nc;
  Matrix r;
  if (!reduce_limits(upper, corr.matrix(), noncentrality, b, r, nc))
    return {0.0, 0.0, true};
  if (b.size() == 0) return {1.0, 0.0, true};
  if (b.size() == 1) return {nct_cdf(b(0), nc(0), nu), 1e-12, true};
  return qmc::mvt_rqmc(b, r, nc, nu, cfg);
}

double noncentral_t_cdf(double x, double delta, double nu) {
  if (!(nu > 0.0))
    throw std::domain_error("noncentral_t_cdf: nu must be positive");
  return nct_cdf(x, delta, nu);
}

// ---------------------------------------------------------------------------

namespace {

// log pdf of N_d(mu, Omega) via Cholesky
double mvn_logpdf(const Vector& y, const Vector& mu, const Matrix& omega) {
  const int d = static_cast<int>(y.size());
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mvn pdf: scale matrix not positive definite");
  const Vector u = llt.matrixL().solve(y - mu);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * u.squaredNorm() - logdet - 0.5 * d * std::log(2.0 * pi);
}

double mvt_logpdf(const Vector& y, const Vector& mu, const Matrix& omega,
                  double nu) {
  const int d = static_cast<int>(y.size());
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mvt pdf: scale matrix not positive definite");
  const Vector u = llt.matrixL().solve(y - mu);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
         0.5 * d * std::log(nu * pi) - logdet -
         0.5 * (nu + d) * std::log1p(u.squaredNorm() / nu);
}

}  // namespace

double esn_pdf(const Vector& y, const Vector& mu, const Matrix& omega,
               const Vector& alpha, double tau) {
  const Vector w = omega.diagonal().array().sqrt();
  const Vector z = (y - mu).array() / w.array();
  Matrix corr = omega;
  for (int i = 0; i < corr.rows(); ++i)
    for (int j = 0; j < corr.cols(); ++j) corr(i, j) /= w(i) * w(j);
  const double q = alpha.dot(corr * alpha);
  const double normaliser = norm_cdf(tau / std::sqrt(1.0 + q));
  return std::exp(mvn_logpdf(y, mu, omega)) * norm_cdf(alpha.dot(z) + tau) /
         normaliser;
}

double mvt_pdf(const Vector& y, const Vector& mu, const Matrix& omega,
               double nu) {
  return std::exp(mvt_logpdf(y, mu, omega, nu));
}

double ncest_pdf(const Vector& y, const SkewTParams& p) {
  p.validate();
  const int d = p.dim();
  const Vector w = p.omega_diag_sqrt();
  const Vector z = (y - p.mu).array() / w.array();
  const Matrix corr = p.corr();
  Eigen::LLT<Matrix> llt(corr);
  const Vector u = llt.matrixL().solve(z);
  const double qz = u.squaredNorm();  // z' corr^{-1} z
  const double arg =
      (p.alpha.dot(z) + p.tau) * std::sqrt((p.nu + d) / (p.nu + qz));
  const double numer = nct_cdf(arg, p.kappa, p.nu + d);
  const double denom = nct_cdf(p.tau_bar(), p.kappa_bar(), p.nu);
  return std::exp(mvt_logpdf(y, p.mu, p.omega, p.nu)) * numer / denom;
}

ProbResult ncest_cdf(const Vector& y, const SkewTParams& p,
                     const QmcConfig& cfg) {
  p.validate();
  const int d = p.dim();
  const Vector w = p.omega_diag_sqrt();
  Vector zbar(d + 1);
  for (int i = 0; i < d; ++i)
    zbar(i) = std::isinf(y(i)) ? y(i) : (y(i) - p.mu(i)) / w(i);
  zbar(d) = p.tau_bar();

  const Matrix corr = p.corr();
  const Vector dl = p.delta_vec();
  Matrix omega_star(d + 1, d + 1);
  omega_star.topLeftCorner(d, d) = corr;
  omega_star.topRightCorner(d, 1) = -dl;
  omega_star.bottomLeftCorner(1, d) = -dl.transpose();
  omega_star(d, d) = 1.0;

  Vector kappa_star = Vector::Zero(d + 1);
  kappa_star(d) = p.kappa_bar();

  const ProbResult numer =
      mvt_cdf(zbar, CorrelationMatrix(omega_star), kappa_star, p.nu, cfg);
  const double denom = nct_cdf(p.tau_bar(), p.kappa_bar(), p.nu);
  return {numer.value / denom, numer.error / denom, numer.converged};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> complement(int d, const std::vector<int>& idx) {
  std::vector<char> in(d, 0);
  for (int i : idx) {
    if (i < 0 || i >= d) throw std::domain_error("index set out of range");
    in[i] = 1;
  }
  std::vector<int> out;
  for (int i = 0; i < d; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

Matrix submatrix(const Matrix& m, const std::vector<int>& rows,
                 const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
  return out;
}

Vector subvector(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

}  // namespace

SkewTParams marginal_params(const SkewTParams& p, const std::vector<int>& keep) {
  p.validate();
  const int d = p.dim();
  if (keep.empty() || static_cast<int>(keep.size()) >= d)
    throw std::domain_error("marginal_params: need a nonempty proper subset");
  const std::vector<int> drop = complement(d, keep);

  const Matrix corr = p.corr();
  const Matrix r_kk = submatrix(corr, keep, keep);
  const Matrix r_kd = submatrix(corr, keep, drop);
  const Matrix r_dd = submatrix(corr, drop, drop);
  const Vector a_k = subvector(p.alpha, keep);
  const Vector a_d = subvector(p.alpha, drop);

  Eigen::LLT<Matrix> llt(r_kk);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("marginal_params: singular correlation block");
  const Matrix r_sc = r_dd - r_kd.transpose() * llt.solve(r_kd);
  const double q = a_d.dot(r_sc * a_d);
  const double s = std::sqrt(1.0 + q);

  SkewTParams out;
  out.mu = subvector(p.mu, keep);
  out.omega = submatrix(p.omega, keep, keep);
  out.alpha = (a_k + llt.solve(r_kd * a_d)) / s;
  out.tau = p.tau / s;
  out.kappa = p.kappa / s;
  out.nu = p.nu;
  return out;
}

SkewTParams conditional_params(const SkewTParams& p,
                               const std::vector<int>& given,
                               const Vector& y_given) {
  p.validate();
  const int d = p.dim();
  if (given.empty() || static_cast<int>(given.size()) >= d)
    throw std::domain_error("conditional_params: need a nonempty proper subset");
  const std::vector<int> rest = complement(d, given);
  const int dg = static_cast<int>(given.size());

  const Matrix o_gg = submatrix(p.omega, given, given);
  const Matrix o_rg = submatrix(p.omega, rest, given);
  const Matrix o_rr = submatrix(p.omega, rest, rest);
  const Vector mu_g = subvector(p.mu, given);
  const Vector mu_r = subvector(p.mu, rest);

  Eigen::LLT<Matrix> llt(o_gg);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("conditional_params: singular scale block");
  const Vector dev = y_given - mu_g;
  const double q_g = dev.dot(llt.solve(dev));
  const double zeta = (p.nu + q_g) / (p.nu + dg);

  const Matrix o_sc = o_rr - o_rg * llt.solve(o_rg.transpose());
  const Vector w_rc = o_sc.diagonal().array().sqrt();
  const Vector w_r = o_rr.diagonal().array().sqrt();
  const Vector w_g = o_gg.diagonal().array().sqrt();
  const Vector a_r = subvector(p.alpha, rest);
  const Vector a_g = subvector(p.alpha, given);

  const Matrix corr = p.corr();
  const Matrix rb_rg = submatrix(corr, rest, given);
  const Matrix rb_gg = submatrix(corr, given, given);
  Eigen::LLT<Matrix> lltg(rb_gg);
  const Vector z_g = dev.array() / w_g.array();

  SkewTParams out;
  out.mu = mu_r + o_rg * llt.solve(dev);
  out.omega = zeta * o_sc;
  out.alpha = (w_rc.array() / w_r.array()).matrix().asDiagonal() * a_r;
  out.tau =
      ((lltg.solve(rb_rg.transpose() * a_r) + a_g).dot(z_g) + p.tau) /
      std::sqrt(zeta);
  // Unlike the plain non-central t, the non-centrality of the extended family
  // is unchanged by conditioning: the same kappa appears in both the
  // numerator and denominator normalisers of the conditional density.
  out.kappa = p.kappa;
  out.nu = p.nu + dg;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr long proposal_guard = 1000000;

[[noreturn]] void acceptance_abort(long proposals, long accepted) {
  throw std::runtime_error(
      "sampler: acceptance probability below 1e-6 (accepted " +
      std::to_string(accepted) + " of " + std::to_string(proposals) +
      " proposals); tau too extreme for rejection sampling");
}

}  // namespace

/* sample_conditioning
 * Z = (X | alpha'X + tau > X0) with a shared chi-square mixing variable:
 * X = Zx/s, X0 = (Z0 + kappa)/s, Zx ~ N(0, corr), Z0 ~ N(0,1), s = chi_nu/sqrt(nu).
 * Rows of the output are mu + omega * Z.
 */
Matrix sample_conditioning(const SkewTParams& p, int n, Rng& rng) {
  p.validate();
  if (n < 1) throw std::domain_error("sample_conditioning: n must be >= 1");
  const int d = p.dim();
  const Matrix corr = p.corr();
  Eigen::LLT<Matrix> llt(corr);
  const Matrix chol = llt.matrixL();
  const Vector w = p.omega_diag_sqrt();

  Matrix out(n, d);
  Vector g(d);
  long proposals = 0, accepted = 0;
  while (accepted < n) {
    ++proposals;
    if (proposals >= proposal_guard && accepted * 1000000L < proposals)
      acceptance_abort(proposals, accepted);
    const double s = std::sqrt(rng.chisq(p.nu) / p.nu);
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    const Vector zx = chol * g;
    const double z0 = rng.normal();
    const Vector x = zx / s;
    const double x0 = (z0 + p.kappa) / s;
    if (p.alpha.dot(x) + p.tau > x0) {
      for (int i = 0; i < d; ++i) out(accepted, i) = p.mu(i) + w(i) * x(i);
      ++accepted;
    }
  }
  return out;
}

/* sample_additive
 * Truncated-variable factorisation of the same law: accept (V, s) on the
 * conditioning event, set the truncated radial coordinate
 * t0 = (V - kappa_bar)/s, then Z = delta t0 + (E + delta kappa_bar)/s with
 * E ~ N(0, corr - delta delta').  Distribution-equal to sample_conditioning.
 */
Matrix sample_additive(const SkewTParams& p, int n, Rng& rng) {
  p.validate();
  if (n < 1) throw std::domain_error("sample_additive: n must be >= 1");
  const int d = p.dim();
  const Matrix corr = p.corr();
  const Vector dl = p.delta_vec();
  const Matrix resid = corr - dl * dl.transpose();
  Eigen::LLT<Matrix> llt(resid);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_additive: residual scale not PD");
  const Matrix chol = llt.matrixL();
  const Vector w = p.omega_diag_sqrt();
  const double tb = p.tau_bar(), kb = p.kappa_bar();

  Matrix out(n, d);
  Vector g(d);
  long proposals = 0, accepted = 0;
  while (accepted < n) {
    ++proposals;
    if (proposals >= proposal_guard && accepted * 1000000L < proposals)
      acceptance_abort(proposals, accepted);
    const double s = std::sqrt(rng.chisq(p.nu) / p.nu);
    const double v = rng.normal();
    if (!(v - kb + tb * s > 0.0)) continue;
    const double t0 = (v - kb) / s;
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    const Vector e = chol * g;
    for (int i = 0; i < d; ++i) {
      const double z = dl(i) * t0 + (e(i) + dl(i) * kb) / s;
      out(accepted, i) = p.mu(i) + w(i) * z;
    }
    ++accepted;
  }
  return out;
}

}  // namespace extskewt
