#pragma once

#include <functional>
#include <string>
#include <vector>

#include "extskewt/tderiv.hpp"

// Inference: pairwise/triplewise composite likelihood with closed-form
// extremal(-skew)-t densities, a restarted derivative-free simplex
// optimiser, CLIC with the sandwich variance, and predictive functionals.

namespace extskewt {

// Map between the unconstrained optimiser space and an ExtDepModel over the
// full site set.  Correlations squash through tanh, nu through exp, the
// power-exponential range/smoothness through exp and a scaled logistic.
struct CompositeSpec {
  enum class Param { FreeCorr, PowExp };

  int order = 2;                          // m = 2 or 3
  std::vector<std::vector<int>> tuples;   // site index tuples
  Param param = Param::FreeCorr;
  int n_sites = 2;
  std::vector<Vector> sites;              // required for PowExp
  bool skew = false;                      // free per-site slant
  bool fix_nu = false;
  double nu_fixed = 1.0;

  void validate() const;
  int n_free() const;
  ExtDepModel build(const Vector& theta) const;
  Vector natural(const Vector& theta) const;   // reporting scale
  std::vector<std::string> param_names() const;
  // default tuple sets: all pairs / all triples
  static std::vector<std::vector<int>> all_tuples(int d, int m);
};

// closed-form extremal(-skew)-t densities on the unit-Frechet scale
double density_d2(const UnitFrechetV& v, const Vector& x);
double density_d3(const UnitFrechetV& v, const Vector& x);
double density_d2(const ExtDepModel& model, const Vector& x,
                  const QmcConfig& cfg);
double density_d3(const ExtDepModel& model, const Vector& x,
                  const QmcConfig& cfg);

// per-observation composite log-likelihood terms (tuple terms with missing
// coordinates are dropped); data rows are observations on unit-Frechet scale
Vector composite_loglik_terms(const CompositeSpec& spec, const Matrix& data,
                              const Vector& theta);
double composite_loglik(const CompositeSpec& spec, const Matrix& data,
                        const Vector& theta);

// ---- derivative-free optimisation ----
struct OptimResult {
  Vector theta;
  double value = 0.0;        // maximised objective
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  std::vector<double> trace; // best objective per accepted step
};

// maximises the objective by restarted Nelder-Mead
OptimResult maximize(const std::function<double(const Vector&)>& objective,
                     const Vector& theta0, int max_iter = 5000,
                     double f_tol = 1e-8, double x_tol = 1e-6);

// profile mode: the nuisance coordinate is maximised by golden-section for
// every outer iterate
OptimResult maximize_profile(
    const std::function<double(const Vector&, double)>& objective,
    const Vector& theta0, double nuisance0, double nuisance_lo,
    double nuisance_hi, int max_iter = 2000);

// ---- model comparison and uncertainty ----
struct FitResult {
  Vector theta_hat;          // unconstrained scale
  Vector natural;            // reporting scale
  std::vector<std::string> names;
  double loglik = 0.0;
  double clic = 0.0;
  Vector std_errors;         // sandwich SEs on the reporting scale
  Matrix j_hat, h_hat;
  std::vector<double> trace;
  bool converged = false;
};

// scores by central finite differences, Hessian likewise; singular H falls
// back to a pseudo-inverse
FitResult clic_fit(const CompositeSpec& spec, const Matrix& data,
                   const OptimResult& opt);

// ---- prediction (trivariate, unit-Frechet thresholds) ----
enum class ExceedancePattern { XgivenYZ, XYgivenZ };

double conditional_exceedance(const ExtDepModel& model3, const Vector& xyz,
                              ExceedancePattern pattern, const QmcConfig& cfg);

// root-solve the free coordinate so the conditional exceedance equals
// p_target; conditioning coordinates sit at their q-quantiles
double conditional_return_level(const ExtDepModel& model3, double q,
                                double p_target, ExceedancePattern pattern,
                                const QmcConfig& cfg);

// bivariate return-level contour: for each x1 on a log grid, the x2 with
// P(X1 > x1, X2 > x2 | Z > z_q) = p_target
std::vector<std::pair<double, double>> conditional_return_contour(
    const ExtDepModel& model3, double q, double p_target, int grid_points,
    const QmcConfig& cfg);

}  // namespace extskewt
