#pragma once

#include "extskewt/extdep.hpp"

// Exponent-function derivative machinery on the unit-Frechet scale for the
// d = 2, 3 extremal-t and extremal-skew-t dependence models.  The t-cdf
// partial derivatives are assembled recursively from the conditional
// decomposition Psi_d' = pdf x conditional cdf, which reproduces the closed
// forms of the derivative catalogue without transcribing them term by term.

namespace extskewt {

// Partials of the central bivariate t cdf Psi2(a, b; rho, nu), through third
// order with at most two derivatives per argument.
struct Psi2Partials {
  double d1 = 0, d2 = 0;
  double d11 = 0, d22 = 0, d12 = 0;
  double d112 = 0, d122 = 0;
};
Psi2Partials psi2_partials(double a, double b, double rho, double nu);

// Partials of the central trivariate t cdf Psi3(y; R, nu) in the first two
// arguments only (the third is a fixed extension coordinate).
struct Psi3Partials {
  double d1 = 0, d2 = 0;
  double d11 = 0, d22 = 0, d12 = 0;
  double d112 = 0, d122 = 0;
};
Psi3Partials psi3_partials(double y1, double y2, double y3, double r12,
                           double r13, double r23, double nu);

// Unit-Frechet exponent of a d = 2 or 3 extremal(-skew)-t model: values,
// mixed partial derivatives, the interior angular density -V_{1..d}, and the
// d = 3 edge-density limit.  Skewed models require tau = 0 (the closed-form
// catalogue covers the central extended family only); the general-tau
// exponent remains available through exponent_V.
class UnitFrechetV {
 public:
  explicit UnitFrechetV(ExtDepModel model);

  const ExtDepModel& model() const { return model_; }
  const MarginDerived& margins() const { return md_; }
  bool skewed() const { return skewed_; }
  int dim() const { return model_.dim(); }

  double value(const Vector& x) const;

  struct Derivs {
    double v = 0;
    Vector grad;
    double v12 = 0, v13 = 0, v23 = 0;
    double v123 = 0;
  };
  Derivs derivs(const Vector& x) const;

  // -V_{1..d}(w) for w strictly inside the simplex (d-1 free coordinates
  // plus the implied last one; pass the full barycentric vector)
  double interior_density(const Vector& w) const;

  // d = 3: angular density on edge {i, j} at w_i = t, w_j = 1 - t, w_l -> 0
  double edge_density(int i, int j, double t) const;

 private:
  struct Kernel;  // per-margin conditioning kernel
  double t_value(int j, const Vector& u) const;
  Derivs compute(const Vector& x, bool need_values) const;

  ExtDepModel model_;
  MarginDerived md_;
  bool skewed_ = false;
  double dof_ = 0.0;                  // nu + 1
  std::vector<Vector> delta_circ_;    // -off-diagonal block of the extension
  Vector tau_bar_;                    // standardized extension per margin
  Vector norm_c_;                     // Psi(tau_bar; nu+1) normalisers
};

}  // namespace extskewt
