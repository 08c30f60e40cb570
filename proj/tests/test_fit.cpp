#include "doctest.h"

#include <cmath>

#include "extskewt/fit.hpp"
#include "extskewt/angular.hpp"
#include "extskewt/special.hpp"

using namespace extskewt;

namespace {

Matrix corr2(double w) {
  Matrix m(2, 2);
  m << 1.0, w, w, 1.0;
  return m;
}

Matrix corr3(double w12, double w13, double w23) {
  Matrix m(3, 3);
  m << 1.0, w12, w13, w12, 1.0, w23, w13, w23, 1.0;
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double v_unit_ref(const ExtDepModel& m, const Vector& x, const QmcConfig& cfg) {
  Vector xs(x.size());
  for (int i = 0; i < x.size(); ++i) xs(i) = std::pow(x(i), 1.0 / m.nu);
  return exponent_V(m, xs, cfg).value;
}

// integral over (0, inf) against the unit-Frechet substitution x = -1/log u
double integrate_frechet(const std::function<double(double)>& f, double tol) {
  return integrate_gk(
      [&](double u) {
        const double lu = std::log(u);
        const double x = -1.0 / lu;
        return f(x) * x * x / u;
      },
      1e-12, 1.0 - 1e-12, tol, tol);
}

}  // namespace

TEST_CASE("density_d2 normalisation and symmetry") {
  ExtDepModel m{corr2(0.6), vec({0.0, 0.0}), 0.0, 1.5};
  UnitFrechetV v(m);
  // exchangeability
  CHECK(density_d2(v, vec({0.7, 1.9})) ==
        doctest::Approx(density_d2(v, vec({1.9, 0.7}))).epsilon(1e-12));
  // integrates to one over the positive quadrant
  const double mass = integrate_frechet(
      [&](double x1) {
        return integrate_frechet(
            [&](double x2) { return density_d2(v, vec({x1, x2})); }, 1e-8);
      },
      1e-6);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("density_d2/d3 against finite differences of exp(-V)") {
  QmcConfig cfg;
  const double h = 1e-3;
  for (const ExtDepModel& m :
       {ExtDepModel{corr2(0.6), vec({0.0, 0.0}), 0.0, 1.5},
        ExtDepModel{corr2(0.45), vec({1.5, -0.6}), 0.0, 2.0}}) {
    UnitFrechetV v(m);
    for (auto x : {vec({1.0, 1.3}), vec({0.6, 2.2}), vec({1.8, 0.9}),
                   vec({0.8, 0.8}), vec({2.5, 2.0})}) {
      auto G = [&](double a, double b) {
        return std::exp(-v_unit_ref(m, vec({a, b}), cfg));
      };
      const double fd = (G(x(0) + h, x(1) + h) - G(x(0) + h, x(1) - h) -
                         G(x(0) - h, x(1) + h) + G(x(0) - h, x(1) - h)) /
                        (4 * h * h);
      CHECK(density_d2(v, x) == doctest::Approx(fd).epsilon(0.01));
    }
  }
  for (const ExtDepModel& m :
       {ExtDepModel{corr3(0.6, 0.8, 0.7), vec({0.0, 0.0, 0.0}), 0.0, 1.0},
        ExtDepModel{corr3(0.6, 0.8, 0.7), vec({-3.0, -3.0, 7.0}), 0.0, 3.0}}) {
    UnitFrechetV v(m);
    for (auto x : {vec({1.0, 1.2, 0.9}), vec({0.7, 1.8, 1.1}),
                   vec({1.5, 0.8, 1.3}), vec({1.1, 1.0, 2.0}),
                   vec({0.9, 0.7, 0.8})}) {
      auto G = [&](const Vector& y) {
        return std::exp(-v_unit_ref(m, y, cfg));
      };
      double fd = 0.0;
      for (int s1 : {-1, 1})
        for (int s2 : {-1, 1})
          for (int s3 : {-1, 1}) {
            Vector y = x;
            y(0) += s1 * h;
            y(1) += s2 * h;
            y(2) += s3 * h;
            fd += s1 * s2 * s3 * G(y);
          }
      fd /= 8 * h * h * h;
      CHECK(density_d3(v, x) == doctest::Approx(fd).epsilon(0.02));
    }
  }
}

TEST_CASE("density_d3 marginalises to density_d2") {
  ExtDepModel m3{corr3(0.6, 0.8, 0.7), vec({0.0, 0.0, 0.0}), 0.0, 1.5};
  UnitFrechetV v3(m3);
  ExtDepModel m2{corr2(0.6), vec({0.0, 0.0}), 0.0, 1.5};
  UnitFrechetV v2(m2);
  for (auto x : {std::pair{1.0, 1.4}, {0.8, 0.9}}) {
    const double marg = integrate_frechet(
        [&](double x3) {
          return density_d3(v3, vec({x.first, x.second, x3}));
        },
        1e-8);
    CHECK(marg == doctest::Approx(density_d2(v2, vec({x.first, x.second})))
                      .epsilon(1e-2));
  }
}

TEST_CASE("composite log likelihood structure") {
  CompositeSpec spec;
  spec.order = 2;
  spec.n_sites = 2;
  spec.tuples = {{0, 1}};
  spec.fix_nu = true;
  spec.nu_fixed = 1.5;
  Matrix data(1, 2);
  data << 1.0, 2.0;
  const Vector theta = vec({std::atanh(0.6)});
  ExtDepModel m = spec.build(theta);
  CHECK(m.corr(0, 1) == doctest::Approx(0.6).epsilon(1e-12));
  UnitFrechetV v(m);
  CHECK(composite_loglik(spec, data, theta) ==
        doctest::Approx(std::log(density_d2(v, vec({1.0, 2.0})))).epsilon(1e-12));

  // additivity over observations and invariance to tuple order
  CompositeSpec spec3;
  spec3.order = 2;
  spec3.n_sites = 3;
  spec3.tuples = {{0, 1}, {0, 2}, {1, 2}};
  spec3.fix_nu = true;
  spec3.nu_fixed = 1.0;
  Matrix d3(2, 3);
  d3 << 1.0, 2.0, 0.5, 0.7, 1.1, 3.0;
  const Vector th3 = vec({std::atanh(0.5), std::atanh(0.2), std::atanh(0.4)});
  const double base = composite_loglik(spec3, d3, th3);
  CompositeSpec reordered = spec3;
  reordered.tuples = {{1, 2}, {0, 2}, {0, 1}};
  CHECK(composite_loglik(reordered, d3, th3) == doctest::Approx(base).epsilon(1e-13));
  // missing coordinate drops the affected tuples only
  Matrix dmiss = d3;
  dmiss(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CompositeSpec only01 = spec3;
  only01.tuples = {{0, 1}};
  const Vector t0 = composite_loglik_terms(spec3, dmiss, th3);
  const Vector t1 = composite_loglik_terms(only01, dmiss, th3);
  CHECK(t0(1) == doctest::Approx(t1(1)).epsilon(1e-13));
}

TEST_CASE("nelder-mead optimiser") {
  // quadratic bowl
  const Vector target = vec({1.0, -2.0, 0.5});
  auto bowl = [&](const Vector& th) { return -(th - target).squaredNorm(); };
  const OptimResult r = maximize(bowl, vec({0.0, 0.0, 0.0}));
  CHECK(r.converged);
  CHECK((r.theta - target).norm() < 1e-5);

  // profile equals joint at the optimum
  auto f2 = [](const Vector& th, double nu) {
    return -(th(0) - 0.3) * (th(0) - 0.3) - (nu - 1.7) * (nu - 1.7);
  };
  const OptimResult prof = maximize_profile(f2, vec({0.0}), 1.0, 0.1, 5.0);
  auto joint = [&](const Vector& th) { return f2(th.head(1), th(1)); };
  const OptimResult both = maximize(joint, vec({0.0, 1.0}));
  CHECK(std::fabs(prof.value - both.value) < 1e-4);
  CHECK(std::fabs(prof.theta(1) - 1.7) < 1e-3);
}

TEST_CASE("clic and sandwich on synthetic pairs") {
  // synthetic extremal-t pairs via the spectral simulator
  ExtDepModel truth{corr2(0.5), vec({0.0, 0.0}), 0.0, 2.0};
  Rng rng(3131);
  const MaxStableResult sim = simulate_maxstable(truth, 1500, rng);
  Matrix data(1500, 2);
  for (int i = 0; i < 1500; ++i)
    for (int j = 0; j < 2; ++j)
      data(i, j) = std::pow(sim.paths(i, j), truth.nu);  // unit Frechet

  CompositeSpec spec;
  spec.order = 2;
  spec.n_sites = 2;
  spec.tuples = {{0, 1}};
  const Vector theta0 = vec({std::atanh(0.4), std::log(1.5)});
  auto obj = [&](const Vector& th) { return composite_loglik(spec, data, th); };
  const OptimResult opt = maximize(obj, theta0);
  CHECK(opt.converged);
  const FitResult fit = clic_fit(spec, data, opt);
  // parameter recovery within a loose band
  CHECK(std::fabs(fit.natural(0) - 0.5) < 0.1);
  CHECK(std::fabs(fit.natural(1) - 2.0) < 0.5);
  // the reported CLIC satisfies its defining identity
  const Matrix h_inv = fit.h_hat.inverse();
  CHECK(fit.clic ==
        doctest::Approx(-2.0 * (fit.loglik - (fit.j_hat * h_inv).trace()))
            .epsilon(1e-10));
  CHECK(fit.std_errors(0) > 0.0);
  CHECK(fit.std_errors(0) < 0.2);
}

TEST_CASE("sandwich standard errors shrink like 1/sqrt(n)") {
  ExtDepModel truth{corr2(0.6), vec({0.0, 0.0}), 0.0, 1.5};
  Rng rng(474747);
  std::vector<int> sizes = {250, 1000, 4000};
  std::vector<double> lse;
  const MaxStableResult sim = simulate_maxstable(truth, 4000, rng);
  for (int n : sizes) {
    Matrix data(n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j)
        data(i, j) = std::pow(sim.paths(i, j), truth.nu);
    CompositeSpec spec;
    spec.order = 2;
    spec.n_sites = 2;
    spec.tuples = {{0, 1}};
    auto obj = [&](const Vector& th) {
      return composite_loglik(spec, data, th);
    };
    const OptimResult opt =
        maximize(obj, vec({std::atanh(0.5), std::log(1.2)}));
    const FitResult fit = clic_fit(spec, data, opt);
    lse.push_back(std::log(fit.std_errors(0)));
  }
  const double slope = (lse[2] - lse[0]) / (std::log(4000.0) - std::log(250.0));
  CHECK(slope > -0.6);
  CHECK(slope < -0.4);
}

TEST_CASE("conditional exceedance limits and simulation oracle") {
  QmcConfig cfg;
  // near-independence: conditional equals the marginal survival
  ExtDepModel ind{corr3(-0.58, -0.58, -0.58), vec({0.0, 0.0, 0.0}), 0.0, 1.0};
  // strongly negatively correlated extremal-t is close to independence
  const Vector xyz = vec({1.5, 2.0, 2.5});
  const double p_ind =
      conditional_exceedance(ind, xyz, ExceedancePattern::XgivenYZ, cfg);
  CHECK(p_ind == doctest::Approx(1.0 - std::exp(-1.0 / 1.5)).epsilon(0.05));

  // complete dependence: conditional tends to one for comparable thresholds
  ExtDepModel dep{corr3(1 - 1e-7, 1 - 1e-7, 1 - 1e-7), vec({0.0, 0.0, 0.0}),
                  0.0, 3.0};
  const double p_dep = conditional_exceedance(dep, vec({1.0, 1.2, 1.4}),
                                              ExceedancePattern::XgivenYZ, cfg);
  CHECK(p_dep > 0.98);

  // Monte Carlo oracle on simulated paths
  ExtDepModel m{corr3(0.6, 0.4, 0.5), vec({1.5, -1.0, 0.5}), 0.0, 2.0};
  Rng rng(8888);
  const MaxStableResult sim = simulate_maxstable(m, 100000, rng);
  Matrix u(100000, 3);
  for (int i = 0; i < 100000; ++i)
    for (int j = 0; j < 3; ++j) u(i, j) = std::pow(sim.paths(i, j), m.nu);
  const Vector thr = vec({2.0, 1.5, 1.2});
  long num = 0, den = 0;
  for (int i = 0; i < 100000; ++i) {
    const bool yz = u(i, 1) > thr(1) && u(i, 2) > thr(2);
    if (yz) {
      ++den;
      if (u(i, 0) > thr(0)) ++num;
    }
  }
  const double emp = static_cast<double>(num) / den;
  const double se = std::sqrt(emp * (1.0 - emp) / den);
  const double theo =
      conditional_exceedance(m, thr, ExceedancePattern::XgivenYZ, cfg);
  CHECK(std::fabs(theo - emp) < 3.0 * se + 1e-3);

  // second pattern
  long num2 = 0, den2 = 0;
  for (int i = 0; i < 100000; ++i) {
    if (u(i, 2) > thr(2)) {
      ++den2;
      if (u(i, 0) > thr(0) && u(i, 1) > thr(1)) ++num2;
    }
  }
  const double emp2 = static_cast<double>(num2) / den2;
  const double se2 = std::sqrt(emp2 * (1.0 - emp2) / den2);
  const double theo2 =
      conditional_exceedance(m, thr, ExceedancePattern::XYgivenZ, cfg);
  CHECK(std::fabs(theo2 - emp2) < 3.0 * se2 + 1e-3);
}

TEST_CASE("conditional return level") {
  QmcConfig cfg;
  ExtDepModel m{corr3(0.6, 0.5, 0.55), vec({0.0, 0.0, 0.0}), 0.0, 2.0};
  // round trip at several targets, and monotonicity
  double prev = 1e18;
  for (double p : {0.05, 0.2, 0.5}) {
    const double level = conditional_return_level(
        m, 0.7, p, ExceedancePattern::XgivenYZ, cfg);
    CHECK(level < prev);
    prev = level;
    Vector xyz(3);
    const double cl = -1.0 / std::log(0.7);
    xyz << level, cl, cl;
    CHECK(conditional_exceedance(m, xyz, ExceedancePattern::XgivenYZ, cfg) ==
          doctest::Approx(p).epsilon(1e-5));
  }
  // p_target = 1 returns the lower search bound
  CHECK(conditional_return_level(m, 0.7, 1.0, ExceedancePattern::XgivenYZ,
                                 cfg) == doctest::Approx(1e-8));
  // bivariate contour points satisfy the target probability
  const auto contour =
      conditional_return_contour(m, 0.7, 0.1, 8, cfg);
  CHECK(contour.size() >= 4);
  const double cl = -1.0 / std::log(0.7);
  for (const auto& [x1, x2] : contour) {
    Vector xyz(3);
    xyz << x1, x2, cl;
    CHECK(conditional_exceedance(m, xyz, ExceedancePattern::XYgivenZ, cfg) ==
          doctest::Approx(0.1).epsilon(1e-3));
  }
}

TEST_CASE("clic prefers the skew model on skewed data") {
  // spec invariant: on data from a strongly skewed model the extremal-skew-t
  // CLIC beats the extremal-t CLIC in at least 90% of replicates
  ExtDepModel truth{corr2(0.55), vec({6.0, -4.0}), 0.0, 1.5};
  int wins = 0;
  const int reps = 50, n = 250;
  for (int r = 0; r < reps; ++r) {
    Rng rng(1000 + r);
    const MaxStableResult sim = simulate_maxstable(truth, n, rng);
    Matrix data(n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j)
        data(i, j) = std::pow(sim.paths(i, j), truth.nu);

    CompositeSpec spec_t;
    spec_t.order = 2;
    spec_t.n_sites = 2;
    spec_t.tuples = {{0, 1}};
    auto obj_t = [&](const Vector& th) {
      return composite_loglik(spec_t, data, th);
    };
    OptimResult opt_t =
        maximize(obj_t, vec({std::atanh(0.5), std::log(1.5)}), 2000);
    const FitResult fit_t = clic_fit(spec_t, data, opt_t);

    CompositeSpec spec_s = spec_t;
    spec_s.skew = true;
    auto obj_s = [&](const Vector& th) {
      return composite_loglik(spec_s, data, th);
    };
    OptimResult opt_s = maximize(
        obj_s, vec({std::atanh(0.5), 1.0, -1.0, std::log(1.5)}), 2000);
    const FitResult fit_s = clic_fit(spec_s, data, opt_s);
    if (fit_s.clic <= fit_t.clic) ++wins;
  }
  CHECK(wins >= 45);
}
