#pragma once

#include <functional>
#include <vector>

#include "extskewt/distmath.hpp"
#include "extskewt/skewproc.hpp"

// Extremal-skew-t max-stable layer: exponent functions, per-margin derived
// parameters and upper moments, the bivariate exponent / extremal
// coefficient, tail-dependence coefficients of the skew-normal, and an
// approximate spectral max-stable simulator.

namespace extskewt {

struct ExtDepModel {
  Matrix corr;   // omega_{i,j}
  Vector alpha;
  double tau = 0.0;
  double nu = 1.0;

  int dim() const { return static_cast<int>(alpha.size()); }
  void validate() const;
};

// Per-margin derived quantities of the exponent function: conditioning
// correlation, slant/extension/non-centrality of the (d-1)-dimensional
// limit law, marginal slant/extension, and the positive-part moment
// m+_j = E{Y+(s_j)^nu}.
struct MarginDerived {
  std::vector<Matrix> corr_circ;
  std::vector<Vector> alpha_circ;
  Vector tau_circ;
  Vector kappa_circ;
  Vector alpha_star;
  Vector tau_star;
  Vector m_plus;
};

MarginDerived margin_derived(const ExtDepModel& model);

struct ValueWithError {
  double value = 0.0;
  double error = 0.0;
};

// Exponent function on the nu-Frechet scale: V(t x) = t^-nu V(x).
ValueWithError exponent_V(const ExtDepModel& model, const MarginDerived& md,
                          const Vector& x, const QmcConfig& cfg);
ValueWithError exponent_V(const ExtDepModel& model, const Vector& x,
                          const QmcConfig& cfg);

// Symmetric special case (alpha = 0, tau = 0), computed through the central
// t cdfs only.
ValueWithError exponent_extremal_t(const ExtDepModel& model, const Vector& x,
                                   const QmcConfig& cfg);

// Limit exponent of iid non-central extended skew-t maxima together with the
// norming sequence a_n; tau and kappa enter only through the norming.
ValueWithError exponent_skewt_limit(const Matrix& corr, const Vector& alpha,
                                    double tau, double kappa, double nu,
                                    const Vector& x, const QmcConfig& cfg);
Vector norming_constants(const Matrix& corr, const Vector& alpha, double tau,
                         double kappa, double nu, double n);

// Univariate central extended skew-t cdf (slant alpha, extension tau).
double est_skewt_cdf1(double x, double alpha, double tau, double nu);

// Bivariate exponent of the extremal-skew-t process at separation h
// (tau = 0 construction): slants alpha(s), alpha(s+h), correlation omega(h).
double bivariate_exponent(double alpha_s, double alpha_sh, double omega,
                          double nu, double x1, double x2);
double extremal_coefficient(double alpha_s, double alpha_sh, double omega,
                            double nu);

enum class TailDepCase { One, TwoA, TwoB, Three };

struct TailDepResult {
  double eta = 0.5;
  TailDepCase case_label = TailDepCase::One;
  std::function<double(double)> slowly_varying;
};

// Coefficient of tail dependence of a bivariate skew-normal pair with
// correlation omega in [0,1) and slants (a1, a2).
TailDepResult tail_dependence(double omega, double a1, double a2);

// ---- approximate spectral max-stable simulator ----
struct MaxStableOptions {
  double stopping = 1e-3;   // relative truncation threshold
  double c_bound = 10.0;    // envelope constant for Y+^nu
  long max_spectral_points = 100000;
};

struct MaxStableResult {
  Matrix paths;             // n_paths x d, nu-Frechet margins
  long truncated_paths = 0; // paths that hit max_spectral_points
};

MaxStableResult simulate_maxstable(const ExtDepModel& model, int n_paths,
                                   Rng& rng, const MaxStableOptions& opts = {});
// Convenience wrapper building the model from a correlation family and an
// alpha-kind slant over explicit sites.
ExtDepModel make_model(const std::vector<Vector>& sites,
                       const PowExpCorrelation& corr_fn,
                       const SlantFunction& alpha_fn, double tau, double nu);

// Pairwise extremal-coefficient estimate from simulated nu-Frechet paths
// via the exponential min spectral estimator; returns (theta_hat, se).
std::pair<double, double> empirical_extremal_coefficient(const Matrix& paths,
                                                         int i, int j,
                                                         double nu);

}  // namespace extskewt
