#include "extskewt/tderiv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "extskewt/special.hpp"

namespace extskewt {

namespace {

// first-column partial set of Psi2: d/da, d^2/da^2, d^2/dadb, d^3/da^2 db
struct HalfPsi2 {
  double d1, d11, d12, d112;
};

HalfPsi2 psi2_half(double a, double b, double rho, double nu) {
  const double sr = std::sqrt(std::max(1.0 - rho * rho, 1e-14));
  const double s = std::sqrt((nu + 1.0) / (nu + a * a));
  const double v = s * (b - rho * a) / sr;
  const double dv_da = -std::sqrt((nu + 1.0) / (1.0 - rho * rho)) *
                       (rho * nu + a * b) / std::pow(nu + a * a, 1.5);
  HalfPsi2 out;
  const double fa = t_pdf(a, nu);
  const double cv = t_cdf(v, nu + 1.0);
  out.d1 = fa * cv;
  out.d11 = t_pdf_d1(a, nu) * cv + fa * t_pdf(v, nu + 1.0) * dv_da;
  out.d12 = bvt_pdf(a, b, rho, nu);
  out.d112 = bvt_pdf_d1(a, b, rho, nu);
  return out;
}

// first-slot partial set of Psi3 with derivatives in the first two arguments
struct HalfPsi3 {
  double d1, d11, d12, d112;
};

HalfPsi3 psi3_half(double y1, double y2, double y3, double r12, double r13,
                   double r23, double nu) {
  const double sr12 = std::sqrt(std::max(1.0 - r12 * r12, 1e-14));
  const double sr13 = std::sqrt(std::max(1.0 - r13 * r13, 1e-14));
  const double s1 = std::sqrt((nu + 1.0) / (nu + y1 * y1));
  const double v2 = s1 * (y2 - r12 * y1) / sr12;
  const double v3 = s1 * (y3 - r13 * y1) / sr13;
  double rc = (r23 - r12 * r13) / (sr12 * sr13);
  rc = std::clamp(rc, -1.0, 1.0);

  HalfPsi3 out;
  const double f1 = t_pdf(y1, nu);
  const double c23 = bvt_cdf(v2, v3, rc, nu + 1.0, 1e-9);
  out.d1 = f1 * c23;

  const double dv2 = -std::sqrt((nu + 1.0) / (1.0 - r12 * r12)) *
                     (r12 * nu + y2 * y1) / std::pow(nu + y1 * y1, 1.5);
  const double dv3 = -std::sqrt((nu + 1.0) / (1.0 - r13 * r13)) *
                     (r13 * nu + y3 * y1) / std::pow(nu + y1 * y1, 1.5);
  const HalfPsi2 g2 = psi2_half(v2, v3, rc, nu + 1.0);
  const HalfPsi2 g3 = psi2_half(v3, v2, rc, nu + 1.0);
  out.d11 = t_pdf_d1(y1, nu) * c23 + f1 * (g2.d1 * dv2 + g3.d1 * dv3);

  // conditional block given (y1, y2)
  const double om12 = 1.0 - r12 * r12;
  const double a1 = (r13 - r12 * r23) / om12;
  const double a2 = (r23 - r12 * r13) / om12;
  const double s33 = std::max(1.0 - r13 * a1 - r23 * a2, 1e-14);
  const double q12 = (y1 * y1 - 2.0 * r12 * y1 * y2 + y2 * y2) / om12;
  const double gg = std::sqrt((nu + 2.0) / ((nu + q12) * s33));
  const double mres = y3 - a1 * y1 - a2 * y2;
  const double w3 = mres * gg;
  const double f12 = bvt_pdf(y1, y2, r12, nu);
  out.d12 = f12 * t_cdf(w3, nu + 2.0);

  const double dq_dy1 = 2.0 * (y1 - r12 * y2) / om12;
  const double dg_dy1 = -gg * dq_dy1 / (2.0 * (nu + q12));
  const double dw_dy1 = -a1 * gg + mres * dg_dy1;
  out.d112 = bvt_pdf_d1(y1, y2, r12, nu) * t_cdf(w3, nu + 2.0) +
             f12 * t_pdf(w3, nu + 2.0) * dw_dy1;
  return out;
}

}  // namespace

Psi2Partials psi2_partials(double a, double b, double rho, double nu) {
  const HalfPsi2 h1 = psi2_half(a, b, rho, nu);
  const HalfPsi2 h2 = psi2_half(b, a, rho, nu);
  Psi2Partials out;
  out.d1 = h1.d1;
  out.d2 = h2.d1;
  out.d11 = h1.d11;
  out.d22 = h2.d11;
  out.d12 = h1.d12;
  out.d112 = h1.d112;
  out.d122 = h2.d112;
  return out;
}

Psi3Partials psi3_partials(double y1, double y2, double y3, double r12,
                           double r13, double r23, double nu) {
  const HalfPsi3 h1 = psi3_half(y1, y2, y3, r12, r13, r23, nu);
  const HalfPsi3 h2 = psi3_half(y2, y1, y3, r12, r23, r13, nu);
  Psi3Partials out;
  out.d1 = h1.d1;
  out.d2 = h2.d1;
  out.d11 = h1.d11;
  out.d22 = h2.d11;
  out.d12 = h1.d12;
  out.d112 = h1.d112;
  out.d122 = h2.d112;
  return out;
}

// ---------------------------------------------------------------------------

struct UnitFrechetV::Kernel {
  // F-partials of the conditioning kernel of margin j, evaluated at u;
  // entries follow the slot order of the rest indices
  double f1[2] = {0, 0};
  double f2[2][2] = {{0, 0}, {0, 0}};
  double f112 = 0, f122 = 0;  // third order, slots (0,0,1) and (0,1,1)
};

UnitFrechetV::UnitFrechetV(ExtDepModel model) : model_(std::move(model)) {
  model_.validate();
  const int d = model_.dim();
  if (d != 2 && d != 3)
    throw std::domain_error("UnitFrechetV: only d = 2, 3 are supported");
  skewed_ = model_.alpha.norm() > 0.0;
  if (model_.tau != 0.0)
    throw std::domain_error(
        "UnitFrechetV: closed-form densities require tau = 0; use exponent_V "
        "for the general case");
  md_ = margin_derived(model_);
  dof_ = model_.nu + 1.0;
  delta_circ_.resize(d);
  tau_bar_.resize(d);
  norm_c_.resize(d);
  for (int j = 0; j < d; ++j) {
    const Vector& ac = md_.alpha_circ[j];
    const Matrix& cc = md_.corr_circ[j];
    const double q = ac.dot(cc * ac);
    delta_circ_[j] = (cc * ac) / std::sqrt(1.0 + q);
    tau_bar_(j) = md_.tau_circ(j) / std::sqrt(1.0 + q);
    norm_c_(j) = t_cdf(tau_bar_(j), dof_);
  }
}

double UnitFrechetV::t_value(int j, const Vector& u) const {
  const int m = model_.dim() - 1;
  if (!skewed_) {
    if (m == 1) return t_cdf(u(0), dof_);
    return bvt_cdf(u(0), u(1), md_.corr_circ[j](0, 1), dof_);
  }
  const Vector& dl = delta_circ_[j];
  if (m == 1) return bvt_cdf(u(0), tau_bar_(j), -dl(0), dof_) / norm_c_(j);
  return tvt_cdf(u(0), u(1), tau_bar_(j), md_.corr_circ[j](0, 1), -dl(0),
                 -dl(1), dof_) /
         norm_c_(j);
}

namespace {

// u-coordinate data of one margin: value, first derivatives in the global
// coordinates, and the single nonzero mixed second derivative
struct UCoord {
  double u = 0;
  double d[3] = {0, 0, 0};
  double dd = 0;  // d^2 u / dx_rest dx_j
  int rest = -1, j = -1;
};

}  // namespace

UnitFrechetV::Derivs UnitFrechetV::derivs(const Vector& x) const {
  return compute(x, true);
}

UnitFrechetV::Derivs UnitFrechetV::compute(const Vector& x,
                                           bool need_values) const {
  const int d = model_.dim();
  if (x.size() != d)
    throw std::domain_error("UnitFrechetV: dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (!(x(i) > 0.0))
      throw std::domain_error("UnitFrechetV: x must be positive");
  const double e = 1.0 / model_.nu;

  Derivs out;
  out.grad = Vector::Zero(d);
  double t_val[3] = {0, 0, 0};
  double t_d1[3][3] = {};
  double t_d2[3][3][3] = {};
  double t_d123[3] = {0, 0, 0};

  for (int j = 0; j < d; ++j) {
    std::vector<int> rest;
    for (int i = 0; i < d; ++i)
      if (i != j) rest.push_back(i);
    const int m = d - 1;

    UCoord uc[2];
    Vector uvec(m);
    for (int p = 0; p < m; ++p) {
      const int r = rest[p];
      const double w = model_.corr(r, j);
      const double c = std::sqrt((model_.nu + 1.0) / (1.0 - w * w));
      const double g =
          std::pow(x(r) * md_.m_plus(r) / (x(j) * md_.m_plus(j)), e);
      uc[p].u = c * (g - w);
      uc[p].d[r] = c * e * g / x(r);
      uc[p].d[j] = -c * e * g / x(j);
      uc[p].dd = -c * e * e * g / (x(r) * x(j));
      uc[p].rest = r;
      uc[p].j = j;
      uvec(p) = uc[p].u;
    }

    Kernel k;
    if (!skewed_) {
      if (m == 1) {
        k.f1[0] = t_pdf(uvec(0), dof_);
        k.f2[0][0] = t_pdf_d1(uvec(0), dof_);
      } else {
        const Psi2Partials p =
            psi2_partials(uvec(0), uvec(1), md_.corr_circ[j](0, 1), dof_);
        k.f1[0] = p.d1;
        k.f1[1] = p.d2;
        k.f2[0][0] = p.d11;
        k.f2[1][1] = p.d22;
        k.f2[0][1] = k.f2[1][0] = p.d12;
        k.f112 = p.d112;
        k.f122 = p.d122;
      }
    } else {
      const Vector& dl = delta_circ_[j];
      const double cn = norm_c_(j);
      if (m == 1) {
        const HalfPsi2 p = psi2_half(uvec(0), tau_bar_(j), -dl(0), dof_);
        k.f1[0] = p.d1 / cn;
        k.f2[0][0] = p.d11 / cn;
      } else {
        const Psi3Partials p =
            psi3_partials(uvec(0), uvec(1), tau_bar_(j),
                          md_.corr_circ[j](0, 1), -dl(0), -dl(1), dof_);
        k.f1[0] = p.d1 / cn;
        k.f1[1] = p.d2 / cn;
        k.f2[0][0] = p.d11 / cn;
        k.f2[1][1] = p.d22 / cn;
        k.f2[0][1] = k.f2[1][0] = p.d12 / cn;
        k.f112 = p.d112 / cn;
        k.f122 = p.d122 / cn;
      }
    }

    if (need_values) t_val[j] = t_value(j, uvec);

    for (int a = 0; a < d; ++a) {
      double s = 0.0;
      for (int p = 0; p < m; ++p) s += k.f1[p] * uc[p].d[a];
      t_d1[j][a] = s;
    }
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        double s = 0.0;
        for (int p = 0; p < m; ++p) {
          const bool mixed_pair = (uc[p].rest == a && uc[p].j == b) ||
                                  (uc[p].rest == b && uc[p].j == a);
          if (mixed_pair) s += k.f1[p] * uc[p].dd;
          for (int q = 0; q < m; ++q)
            s += k.f2[p][q] * uc[p].d[a] * uc[q].d[b];
        }
        t_d2[j][a][b] = t_d2[j][b][a] = s;
      }
    }
    if (d == 3) {
      auto f3 = [&](int p, int q, int r) {
        const int ones = (p == 1) + (q == 1) + (r == 1);
        if (ones == 1) return k.f112;
        if (ones == 2) return k.f122;
        return 0.0;  // triple-repeated slots multiply a vanishing u-product
      };
      double s = 0.0;
      const int a = 0, b = 1, c = 2;
      for (int p = 0; p < m; ++p) {
        auto u2 = [&](int i1, int i2) {
          const bool mm = (uc[p].rest == i1 && uc[p].j == i2) ||
                          (uc[p].rest == i2 && uc[p].j == i1);
          return mm ? uc[p].dd : 0.0;
        };
        for (int q = 0; q < m; ++q) {
          s += k.f2[p][q] * (u2(a, b) * uc[q].d[c] + u2(a, c) * uc[q].d[b] +
                             u2(b, c) * uc[q].d[a]);
        }
        for (int q = 0; q < m; ++q)
          for (int r = 0; r < m; ++r)
            s += f3(p, q, r) * uc[p].d[a] * uc[q].d[b] * uc[r].d[c];
      }
      t_d123[j] = s;
    }
  }

  out.v = 0.0;
  for (int j = 0; j < d; ++j) out.v += t_val[j] / x(j);
  for (int a = 0; a < d; ++a) {
    double s = -t_val[a] / (x(a) * x(a));
    for (int j = 0; j < d; ++j) s += t_d1[j][a] / x(j);
    out.grad(a) = s;
  }
  auto mixed2 = [&](int a, int b) {
    double s = -t_d1[a][b] / (x(a) * x(a)) - t_d1[b][a] / (x(b) * x(b));
    for (int j = 0; j < d; ++j) s += t_d2[j][a][b] / x(j);
    return s;
  };
  out.v12 = mixed2(0, 1);
  if (d == 3) {
    out.v13 = mixed2(0, 2);
    out.v23 = mixed2(1, 2);
    out.v123 = -t_d2[0][1][2] / (x(0) * x(0)) - t_d2[1][0][2] / (x(1) * x(1)) -
               t_d2[2][0][1] / (x(2) * x(2));
    for (int j = 0; j < d; ++j) out.v123 += t_d123[j] / x(j);
  }
  return out;
}

double UnitFrechetV::value(const Vector& x) const {
  const int d = model_.dim();
  if (x.size() != d)
    throw std::domain_error("UnitFrechetV: dimension mismatch");
  const double e = 1.0 / model_.nu;
  double v = 0.0;
  for (int j = 0; j < d; ++j) {
    Vector u(d - 1);
    int p = 0;
    for (int i = 0; i < d; ++i) {
      if (i == j) continue;
      const double w = model_.corr(i, j);
      const double c = std::sqrt((model_.nu + 1.0) / (1.0 - w * w));
      const double g =
          std::pow(x(i) * md_.m_plus(i) / (x(j) * md_.m_plus(j)), e);
      u(p++) = c * (g - w);
    }
    v += t_value(j, u) / x(j);
  }
  return v;
}

double UnitFrechetV::interior_density(const Vector& w) const {
  const int d = model_.dim();
  if (w.size() != d)
    throw std::domain_error("interior_density: dimension mismatch");
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    if (!(w(i) > 0.0))
      throw std::domain_error("interior_density: w must be interior");
    sum += w(i);
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::domain_error("interior_density: w must lie on the simplex");
  // only the top mixed derivative is needed, so the T values (the costly
  // cdf evaluations) are skipped
  const Derivs dv = compute(w, false);
  return (d == 2) ? -dv.v12 : -dv.v123;
}

/* edge_density
 * Limit of -(x_i + x_j)^3 d^2 V / dx_i dx_j as the off-edge coordinate goes
 * to zero: the off-edge u-coordinates freeze at -c w and the dropped
 * margin's block vanishes at rate x_l^{1/nu}.
 */
double UnitFrechetV::edge_density(int i, int j, double t) const {
  const int d = model_.dim();
  if (d != 3) throw std::domain_error("edge_density: d = 3 only");
  if (i == j || i < 0 || j < 0 || i >= 3 || j >= 3)
    throw std::domain_error("edge_density: bad edge");
  if (!(t > 0.0 && t < 1.0))
    throw std::domain_error("edge_density: t must be in (0,1)");
  const int l = 3 - i - j;
  const double e = 1.0 / model_.nu;
  double x[3];
  x[i] = t;
  x[j] = 1.0 - t;
  x[l] = 0.0;

  double h = 0.0;
  for (int a : {i, j}) {
    const int b = (a == i) ? j : i;
    std::vector<int> rest;
    for (int q = 0; q < 3; ++q)
      if (q != a) rest.push_back(q);
    const int slot_b = (rest[0] == b) ? 0 : 1;

    const double wb = model_.corr(b, a);
    const double cb = std::sqrt((model_.nu + 1.0) / (1.0 - wb * wb));
    const double g =
        std::pow(x[b] * md_.m_plus(b) / (x[a] * md_.m_plus(a)), e);
    const double wl = model_.corr(l, a);
    const double cl = std::sqrt((model_.nu + 1.0) / (1.0 - wl * wl));

    Vector u(2);
    u(slot_b) = cb * (g - wb);
    u(1 - slot_b) = -cl * wl;  // frozen off-edge coordinate
    const double du_db = cb * e * g / x[b];
    const double du_da = -cb * e * g / x[a];
    const double ddu = -cb * e * e * g / (x[a] * x[b]);

    double f1, f11;
    if (!skewed_) {
      const Psi2Partials p =
          psi2_partials(u(0), u(1), md_.corr_circ[a](0, 1), dof_);
      f1 = (slot_b == 0) ? p.d1 : p.d2;
      f11 = (slot_b == 0) ? p.d11 : p.d22;
    } else {
      const Vector& dl = delta_circ_[a];
      const Psi3Partials p =
          psi3_partials(u(0), u(1), tau_bar_(a), md_.corr_circ[a](0, 1),
                        -dl(0), -dl(1), dof_);
      f1 = ((slot_b == 0) ? p.d1 : p.d2) / norm_c_(a);
      f11 = ((slot_b == 0) ? p.d11 : p.d22) / norm_c_(a);
    }
    const double t_b = f1 * du_db;  // dT_a/dx_b
    const double t_ab = f11 * du_da * du_db + f1 * ddu;
    h -= t_ab / x[a] - t_b / (x[a] * x[a]);
  }
  return h;
}

}  // namespace extskewt
