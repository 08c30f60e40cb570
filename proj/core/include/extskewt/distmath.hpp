#pragma once

#include <vector>

#include "extskewt/qmc.hpp"
#include "extskewt/rng.hpp"

// Distribution kernel: multivariate normal/t cdfs, extended skew-normal and
// non-central extended skew-t densities and cdfs, the marginal/conditional
// parameter closure of the family, and two exact samplers.

namespace extskewt {

class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(Matrix m);
  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

// Parameters (mu, Omega, alpha, tau, kappa, nu) of a non-central extended
// skew-t law.  kappa = 0 and tau = 0 recover the usual skew-t; additionally
// alpha = 0 recovers the symmetric t.
struct SkewTParams {
  Vector mu;
  Matrix omega;  // scale matrix, positive definite
  Vector alpha;
  double tau = 0.0;
  double kappa = 0.0;
  double nu = 1.0;

  int dim() const { return static_cast<int>(mu.size()); }
  void validate() const;

  Vector omega_diag_sqrt() const;  // omega = diag(Omega)^(1/2)
  Matrix corr() const;             // standardized scale matrix
  double q_alpha() const;          // alpha' corr alpha
  Vector delta_vec() const;        // (1+Q)^(-1/2) corr alpha
  double tau_bar() const;
  double kappa_bar() const;
};

// ---- multivariate normal / t cdfs ----
// Coordinates at +inf are marginalised out; any -inf coordinate gives 0.
// Deterministic quadrature up to dimension 3, randomized QMC beyond.
ProbResult mvn_cdf(const Vector& upper, const CorrelationMatrix& corr,
                   const QmcConfig& cfg);
ProbResult mvt_cdf(const Vector& upper, const CorrelationMatrix& corr,
                   const Vector& noncentrality, double nu, const QmcConfig& cfg);
// Forces the randomized QMC separation-of-variables route at any dimension;
// kept as an independent cross-check of the quadrature mixture.
ProbResult mvt_cdf_qmc(const Vector& upper, const CorrelationMatrix& corr,
                       const Vector& noncentrality, double nu,
                       const QmcConfig& cfg);

double noncentral_t_cdf(double x, double delta, double nu);

// ---- densities / cdfs of the skew families ----
// Extended skew-normal pdf with location mu, scale omega, slant alpha,
// extension tau.
double esn_pdf(const Vector& y, const Vector& mu, const Matrix& omega,
               const Vector& alpha, double tau);

// Multivariate t pdf (used by the skew-t kernel and exposed for tests).
double mvt_pdf(const Vector& y, const Vector& mu, const Matrix& omega,
               double nu);

double ncest_pdf(const Vector& y, const SkewTParams& p);
ProbResult ncest_cdf(const Vector& y, const SkewTParams& p,
                     const QmcConfig& cfg);

// ---- closure under marginalisation / conditioning ----
// keep: indices of the retained block (nonempty proper subset of 0..d-1).
SkewTParams marginal_params(const SkewTParams& p, const std::vector<int>& keep);
// given: indices of the conditioning block, y_given their observed values.
SkewTParams conditional_params(const SkewTParams& p,
                               const std::vector<int>& given,
                               const Vector& y_given);

// ---- exact samplers; one draw per row ----
Matrix sample_conditioning(const SkewTParams& p, int n, Rng& rng);
Matrix sample_additive(const SkewTParams& p, int n, Rng& rng);

}  // namespace extskewt
