#pragma once

#include <functional>
#include <string>
#include <vector>

#include "extskewt/distmath.hpp"

// Non-stationary skew-normal random process: finite-dimensional parameter
// maps, mean/covariance/variogram, the power-exponential correlation family,
// and two exact simulators.

namespace extskewt {

struct SlantFunction {
  enum class Kind { Delta, Alpha };  // delta(s) in (-1,1) or unbounded alpha(s)
  Kind kind = Kind::Delta;
  std::function<double(const Vector&)> eval;

  double operator()(const Vector& s) const { return eval(s); }
};

SlantFunction constant_slant(double value, SlantFunction::Kind kind);
// delta(s) = a sin(b s) and delta(s) = a^2 sin(b s) cos(b s), scalar sites
SlantFunction slant_sin(double a, double b);
SlantFunction slant_sincos(double a, double b);

// rho(h) = exp(-(h/lambda)^xi)
struct PowExpCorrelation {
  double lambda = 1.0;
  double xi = 1.0;

  void validate() const;
  double operator()(double h) const;
};

struct ProcessSpec {
  enum class Construction { Additive, Conditioning };

  std::vector<Vector> sites;
  PowExpCorrelation correlation;
  SlantFunction slant;
  double extension = 0.0;  // epsilon for the additive form, tau otherwise
  Construction construction = Construction::Additive;

  void validate() const;
  int dim() const { return static_cast<int>(sites.size()); }
  Matrix base_correlation() const;  // correlation of the generating field
};

// Joint skew-normal parameters of (Z(s_1), ..., Z(s_d)) for the additive
// construction with a delta slant.
struct FiniteDimParams {
  Matrix corr;   // valid correlation matrix
  Vector alpha;
  double tau = 0.0;
};
FiniteDimParams finite_dim_params(const ProcessSpec& spec);

double mean_function(const ProcessSpec& spec, const Vector& s);
// c_s(h) = Cov{Z(s), Z(s+h)}
double covariance_function(const ProcessSpec& spec, const Vector& s,
                           const Vector& h);
double ns_correlation(const ProcessSpec& spec, const Vector& s,
                      const Vector& h);
double variogram(const ProcessSpec& spec, const Vector& s, const Vector& h);

// One path per row, one site per column.
Matrix simulate_additive(const ProcessSpec& spec, int n_paths, Rng& rng);
Matrix simulate_conditioning(const ProcessSpec& spec, int n_paths, Rng& rng);

// Exact draws from SN_d(corr, alpha, tau) via the truncated-variable
// factorisation; acceptance free.  Used by the simulators and the spectral
// max-stable construction.
Matrix sn_sample(const Matrix& corr, const Vector& alpha, double tau, int n,
                 Rng& rng);

// Univariate extended skew-normal cdf (slant alpha, extension tau).
double esn_cdf1(double z, double alpha, double tau);

// Cholesky factor with a tiny diagonal jitter retry for near-singular
// correlation matrices (xi = 2 grids).
Matrix safe_cholesky(const Matrix& m);

// Figure-style process presets on [0,1], power-exponential correlation
// (lambda = 0.3, xi = 1.5), epsilon = 0; rows 1-4 of the slant catalogue.
ProcessSpec process_preset(int row, int n_sites);

}  // namespace extskewt
