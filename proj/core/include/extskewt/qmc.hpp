#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

namespace extskewt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Controls the randomised quasi-Monte Carlo backend of the multivariate
// normal / t cdfs.
struct QmcConfig {
  int sample_count = 4096;
  std::uint64_t seed = 20240901ULL;
  double target_abs_tol = 1e-6;
  int max_randomizations = 12;

  void validate() const {
    if (sample_count < 128)
      throw std::invalid_argument("QmcConfig: sample_count must be >= 128");
    if (!(target_abs_tol > 0.0 && target_abs_tol < 1.0))
      throw std::invalid_argument("QmcConfig: target_abs_tol must be in (0,1)");
    if (max_randomizations < 1)
      throw std::invalid_argument("QmcConfig: max_randomizations must be >= 1");
  }
};

// Probability with an attached error estimate.  `converged` records whether
// the estimated error met the requested tolerance.
struct ProbResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

namespace qmc {

// P(X <= upper), X ~ N(0, corr); randomized Richtmyer rule with Genz
// variable reordering.  Valid for any dimension >= 1.
ProbResult mvn_rqmc(const Vector& upper, const Matrix& corr,
                    const QmcConfig& cfg);

// P(T <= upper), T non-central multivariate t with the given correlation,
// non-centrality shift and dof, via the separation-of-variables form with a
// chi radial coordinate.
ProbResult mvt_rqmc(const Vector& upper, const Matrix& corr,
                    const Vector& noncentrality, double nu,
                    const QmcConfig& cfg);

}  // namespace qmc

}  // namespace extskewt
