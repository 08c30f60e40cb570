#include "extskewt/qmc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "extskewt/rng.hpp"
#include "extskewt/special.hpp"

namespace extskewt {
namespace qmc {

namespace {

constexpr double clip_limit = 38.0;  // Phi(-38) < 1e-300

const int primes[] = {2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,
                      41,  43,  47,  53,  59,  61,  67,  71,  73,  79,  83,  89,
                      97,  101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151,
                      157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
                      227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281};

struct Ordered {
  Matrix chol;            // lower triangular factor of the permuted correlation
  std::vector<int> perm;  // perm[i] = original index in slot i
};

/* reorder_cholesky
 * Genz variable ordering: at each stage pick the remaining variable with the
 * smallest conditional probability, conditioning earlier coordinates on their
 * truncated-normal means.  Improves RQMC accuracy for unbalanced limits.
 */
Ordered reorder_cholesky(Vector b, const Matrix& corr) {
  const int d = static_cast<int>(b.size());
  Matrix r = corr;
  Matrix ell = Matrix::Zero(d, d);
  Vector y = Vector::Zero(d);
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) perm[i] = i;

  for (int i = 0; i < d; ++i) {
    int best = i;
    double best_p = 2.0;
    for (int j = i; j < d; ++j) {
      double s2 = r(j, j);
      double m = 0.0;
      for (int k = 0; k < i; ++k) {
        s2 -= ell(j, k) * ell(j, k);
        m += ell(j, k) * y(k);
      }
      s2 = std::max(s2, 1e-14);
      const double p = norm_cdf((b(j) - m) / std::sqrt(s2));
      if (p < best_p) {
        best_p = p;
        best = j;
      }
    }
    if (best != i) {
      std::swap(b(i), b(best));
      std::swap(perm[i], perm[best]);
      r.row(i).swap(r.row(best));
      r.col(i).swap(r.col(best));
      ell.row(i).swap(ell.row(best));
    }
    double s2 = r(i, i);
    double m = 0.0;
    for (int k = 0; k < i; ++k) {
      s2 -= ell(i, k) * ell(i, k);
      m += ell(i, k) * y(k);
    }
    if (s2 <= 0.0)
      throw std::runtime_error("qmc: correlation matrix is not positive definite");
    ell(i, i) = std::sqrt(s2);
    for (int j = i + 1; j < d; ++j) {
      double v = r(j, i);
      for (int k = 0; k < i; ++k) v -= ell(i, k) * ell(j, k);
      ell(j, i) = v / ell(i, i);
    }
    const double e = (b(i) - m) / ell(i, i);
    const double phi_e = std::max(norm_cdf(e), 1e-300);
    y(i) = -norm_pdf(e) / phi_e;  // E[Z | Z < e]
  }
  return {ell, perm};
}

// One scrambled point of the sequential conditional sampler; limit(i) is the
// upper limit of permuted coordinate i.  u has d-1 coordinates.
template <typename LimitFn>
double sequential_prob(const Matrix& ell, int d, LimitFn&& limit,
                       const double* u) {
  double z[64];
  double e = norm_cdf(std::clamp(limit(0) / ell(0, 0), -clip_limit, clip_limit));
  double f = e;
  for (int i = 1; i < d; ++i) {
    const double q = std::clamp(u[i - 1] * e, 1e-320, 1.0 - 1e-16);
    z[i - 1] = norm_quantile(q);
    double m = 0.0;
    for (int k = 0; k < i; ++k) m += ell(i, k) * z[k];
    e = norm_cdf(std::clamp((limit(i) - m) / ell(i, i), -clip_limit, clip_limit));
    f *= e;
  }
  return f;
}

// Randomised Richtmyer rule: point k, coordinate c is |2 frac(k sqrt(p_c) + D_c) - 1|.
template <typename Integrand>
ProbResult rqmc_loop(int dim, const QmcConfig& cfg, Integrand&& integrand) {
  cfg.validate();
  if (dim > 48) throw std::invalid_argument("qmc: dimension too large");
  Rng rng(cfg.seed);
  std::vector<double> q(dim);
  for (int c = 0; c < dim; ++c) q[c] = std::sqrt(static_cast<double>(primes[c]));

  std::vector<double> means;
  std::vector<double> u(std::max(dim, 1));
  std::vector<double> delta(std::max(dim, 1));
  double value = 0.0, error = 1.0;
  for (int m = 0; m < cfg.max_randomizations; ++m) {
    for (int c = 0; c < dim; ++c) delta[c] = rng.uniform();
    double acc = 0.0;
    for (int k = 1; k <= cfg.sample_count; ++k) {
      for (int c = 0; c < dim; ++c) {
        const double x = std::fmod(k * q[c] + delta[c], 1.0);
        u[c] = std::fabs(2.0 * x - 1.0);
      }
      acc += (integrand(u.data()) - acc) / k;
    }
    means.push_back(acc);
    const int n = static_cast<int>(means.size());
    double mu = 0.0;
    for (double v : means) mu += v;
    mu /= n;
    value = mu;
    if (n >= 4) {
      double s2 = 0.0;
      for (double v : means) s2 += (v - mu) * (v - mu);
      s2 /= (n - 1.0);
      error = 3.0 * std::sqrt(s2 / n);
      if (error < cfg.target_abs_tol) break;
    }
  }
  return {value, error, error < cfg.target_abs_tol};
}

}  // namespace

ProbResult mvn_rqmc(const Vector& upper, const Matrix& corr,
                    const QmcConfig& cfg) {
  const int d = static_cast<int>(upper.size());
  if (d == 0) throw std::domain_error("mvn_rqmc: dimension zero");
  const Vector b = upper.cwiseMin(clip_limit).cwiseMax(-clip_limit);
  if (d == 1) return {norm_cdf(b(0)), 1e-16, true};
  const Ordered ord = reorder_cholesky(b, corr);
  Vector bp(d);
  for (int i = 0; i < d; ++i) bp(i) = b(ord.perm[i]);
  auto integrand = [&](const double* u) {
    return sequential_prob(ord.chol, d, [&](int i) { return bp(i); }, u);
  };
  return rqmc_loop(d - 1, cfg, integrand);
}

ProbResult mvt_rqmc(const Vector& upper, const Matrix& corr,
                    const Vector& noncentrality, double nu,
                    const QmcConfig& cfg) {
  if (nu <= 0.0) throw std::domain_error("mvt_rqmc: nu must be positive");
  const int d = static_cast<int>(upper.size());
  if (d == 0) throw std::domain_error("mvt_rqmc: dimension zero");
  // order once, at the median radial scale
  const double s_med = chi_quantile(0.5, nu) / std::sqrt(nu);
  Vector b0(d);
  for (int i = 0; i < d; ++i)
    b0(i) = std::clamp(s_med * upper(i) - noncentrality(i), -clip_limit,
                       clip_limit);
  const Ordered ord = reorder_cholesky(b0, corr);
  Vector bp(d), ncp(d);
  for (int i = 0; i < d; ++i) {
    bp(i) = upper(ord.perm[i]);
    ncp(i) = noncentrality(ord.perm[i]);
  }
  const double rns = 1.0 / std::sqrt(nu);
  auto integrand = [&](const double* u) {
    const double p = std::clamp(u[0], 1e-16, 1.0 - 1e-16);
    const double s = chi_quantile(p, nu) * rns;
    return sequential_prob(
        ord.chol, d,
        [&](int i) {
          const double bi = bp(i);
          if (std::isinf(bi)) return bi > 0 ? clip_limit : -clip_limit;
          return std::clamp(s * bi - ncp(i), -clip_limit, clip_limit);
        },
        u + 1);
  };
  return rqmc_loop(d, cfg, integrand);
}

}  // namespace qmc
}  // namespace extskewt
