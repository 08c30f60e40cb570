#pragma once

#include <functional>

// Scalar special functions and low-dimensional distribution kernels used
// throughout the library: normal, Student t (central and non-central),
// skew-normal, chi, and deterministic quadrature for the bivariate /
// trivariate normal and t cdfs.

namespace extskewt {

inline constexpr double pi = 3.14159265358979323846;

// ---- univariate normal ----
double norm_pdf(double x);
double norm_cdf(double x);
double norm_sf(double x);          // survival, accurate in the upper tail
double norm_quantile(double p);    // Wichura AS241, double precision

// Owen's T function T(h, a); used for the univariate skew-normal cdf.
double owen_t(double h, double a);

// ---- univariate skew-normal, slant alpha, extension tau ----
double sn_pdf(double z, double alpha, double tau = 0.0);
double sn_cdf(double z, double alpha);           // tau = 0 closed form via Owen T
double sn_quantile(double p, double alpha);

// ---- univariate Student t ----
double t_pdf(double x, double nu);
double t_pdf_d1(double x, double nu);            // d/dx t_pdf
double t_pdf_d2(double x, double nu);            // d^2/dx^2 t_pdf
double t_cdf(double x, double nu);
double t_sf(double x, double nu);
double t_quantile(double p, double nu);

// Non-central t cdf P(T <= x), T = (Z + delta)/sqrt(W/nu).
// Series evaluation (Boost backend) with a numeric-mixture fallback for
// extreme non-centrality where the series loses the plot.
double nct_cdf(double x, double delta, double nu);

// ---- chi / chi-square ----
double chi_pdf(double r, double nu);             // chi_nu density
double chi_quantile(double p, double nu);
double chisq_cdf(double x, double nu);

// ---- adaptive Gauss-Kronrod (15 point) on a finite interval ----
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double abs_tol = 1e-10, double rel_tol = 1e-10,
                    int max_depth = 14);

// Integral of f over (a, +inf) via a rational stretch substitution.
double integrate_gk_upper(const std::function<double(double)>& f, double a,
                          double abs_tol = 1e-10, double rel_tol = 1e-10);

// Expectation of g(s) for s = R/sqrt(nu), R ~ chi_nu.  The scale-mixture
// bridge between multivariate normal and t quantities.
double chi_mixture(const std::function<double(double)>& g, double nu,
                   double tol = 3e-12);

// ---- bivariate normal cdf P(X1 <= h, X2 <= k), correlation rho ----
double bvn_cdf(double h, double k, double rho);

// ---- trivariate normal cdf, correlations (r12, r13, r23) ----
double tvn_cdf(double b1, double b2, double b3, double r12, double r13,
               double r23, double tol = 1e-11);

// ---- central bivariate t cdf, correlation rho, dof nu ----
double bvt_cdf(double x1, double x2, double rho, double nu, double tol = 3e-12);

// Bivariate t pdf and the first partial of the pdf in x1.
double bvt_pdf(double x1, double x2, double rho, double nu);
double bvt_pdf_d1(double x1, double x2, double rho, double nu);

// ---- central trivariate t cdf ----
double tvt_cdf(double x1, double x2, double x3, double r12, double r13,
               double r23, double nu, double tol = 1e-10);

}  // namespace extskewt
