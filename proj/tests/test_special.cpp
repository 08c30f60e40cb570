#include "doctest.h"

#include <cmath>

#include "extskewt/special.hpp"

using namespace extskewt;

TEST_CASE("normal cdf and quantile") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
  CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  // positive deep tail is limited by 1-p cancellation in doubles,
  // so the roundtrip is probed on the exactly representable side
  for (double x : {-8.0, -3.2, -0.7, 0.0, 0.4, 2.5, 5.0}) {
    CHECK(norm_quantile(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
  }
  CHECK(norm_sf(10.0) == doctest::Approx(7.619853024160526e-24).epsilon(1e-10));
}

TEST_CASE("owen t identities") {
  // T(0, a) = atan(a) / (2 pi)
  CHECK(owen_t(0.0, 0.7) == doctest::Approx(std::atan(0.7) / (2 * pi)).epsilon(1e-13));
  // T(h, 1) = Phi(h) (1 - Phi(h)) / 2
  for (double h : {0.1, 0.8, 2.3}) {
    const double p = norm_cdf(h);
    CHECK(owen_t(h, 1.0) == doctest::Approx(0.5 * p * (1.0 - p)).epsilon(1e-12));
  }
  // antisymmetry in a, symmetry in h
  CHECK(owen_t(1.2, -0.4) == doctest::Approx(-owen_t(1.2, 0.4)));
  CHECK(owen_t(-1.2, 0.4) == doctest::Approx(owen_t(1.2, 0.4)));
  // large a reduction
  CHECK(owen_t(0.9, 1e12) == doctest::Approx(0.5 * norm_sf(0.9)).epsilon(1e-10));
}

TEST_CASE("skew normal cdf vs quadrature") {
  for (double a : {-2.0, 0.0, 1.5}) {
    for (double z : {-1.0, 0.3, 2.0}) {
      const double q = integrate_gk([&](double t) { return sn_pdf(t, a); },
                                    -12.0, z, 1e-12, 1e-12);
      CHECK(sn_cdf(z, a) == doctest::Approx(q).epsilon(1e-9));
    }
  }
  CHECK(sn_quantile(sn_cdf(0.7, -1.3), -1.3) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("student t basics") {
  CHECK(t_cdf(0.0, 3.0) == doctest::Approx(0.5));
  // t cdf with 2 dof has the closed form 1/2 + x / (2 sqrt(2 + x^2))
  for (double x : {-2.0, -0.3, 1.0, 4.0}) {
    const double ref = 0.5 + x / (2.0 * std::sqrt(2.0 + x * x));
    CHECK(t_cdf(x, 2.0) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(t_quantile(t_cdf(1.7, 4.5), 4.5) == doctest::Approx(1.7).epsilon(1e-10));
  // pdf derivatives against finite differences
  for (double x : {-1.2, 0.4, 2.0}) {
    const double h = 1e-5;
    const double fd1 = (t_pdf(x + h, 5.0) - t_pdf(x - h, 5.0)) / (2 * h);
    const double fd2 =
        (t_pdf(x + h, 5.0) - 2 * t_pdf(x, 5.0) + t_pdf(x - h, 5.0)) / (h * h);
    CHECK(t_pdf_d1(x, 5.0) == doctest::Approx(fd1).epsilon(1e-7));
    CHECK(t_pdf_d2(x, 5.0) == doctest::Approx(fd2).epsilon(1e-4));
  }
}

TEST_CASE("noncentral t cdf") {
  CHECK(nct_cdf(0.0, 0.0, 7.0) == doctest::Approx(0.5));
  CHECK(nct_cdf(2.0, 0.0, 5.0) == doctest::Approx(t_cdf(2.0, 5.0)).epsilon(1e-12));
  // quadrature oracle for the defining scale mixture
  for (double delta : {0.5, -1.5, 3.0}) {
    for (double x : {1.0, -0.5, 2.5}) {
      const double oracle = chi_mixture(
          [&](double s) { return norm_cdf(x * s - delta); }, 4.0);
      CHECK(nct_cdf(x, delta, 4.0) == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
  // extreme non-centrality goes through the mixture fallback
  CHECK(nct_cdf(45.0, 40.0, 10.0) > 0.0);
  CHECK(nct_cdf(45.0, 40.0, 10.0) < 1.0);
  CHECK_THROWS(nct_cdf(1.0, 0.5, -1.0));
}

TEST_CASE("chi helpers") {
  CHECK(chisq_cdf(chi_quantile(0.3, 5.0) * chi_quantile(0.3, 5.0), 5.0) ==
        doctest::Approx(0.3).epsilon(1e-10));
  const double total = integrate_gk([&](double r) { return chi_pdf(r, 3.0); },
                                    0.0, 40.0, 1e-12, 1e-12);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bivariate normal cdf") {
  // Phi2(0,0;rho) = 1/4 + asin(rho)/(2 pi)
  for (double r : {-0.9, -0.3, 0.0, 0.5, 0.925, 0.99}) {
    const double ref = 0.25 + std::asin(r) / (2.0 * pi);
    CHECK(bvn_cdf(0.0, 0.0, r) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(bvn_cdf(0.7, -0.2, 0.0) ==
        doctest::Approx(norm_cdf(0.7) * norm_cdf(-0.2)).epsilon(1e-13));
  CHECK(bvn_cdf(1.0, 2.0, 1.0) == doctest::Approx(norm_cdf(1.0)));
  // quadrature oracle at a generic point
  const double h = 0.6, k = -0.8, rho = 0.65;
  const double sr = std::sqrt(1.0 - rho * rho);
  const double oracle = integrate_gk(
      [&](double x) { return norm_pdf(x) * norm_cdf((k - rho * x) / sr); },
      -10.0, h, 1e-13, 1e-13);
  CHECK(bvn_cdf(h, k, rho) == doctest::Approx(oracle).epsilon(1e-11));
}

TEST_CASE("trivariate normal cdf") {
  // equicorrelated orthant: 1/8 + 3 asin(rho) / (4 pi)
  for (double r : {0.0, 0.5, -0.2}) {
    const double ref = 0.125 + 3.0 * std::asin(r) / (4.0 * pi);
    CHECK(tvn_cdf(0.0, 0.0, 0.0, r, r, r) == doctest::Approx(ref).epsilon(1e-9));
  }
  CHECK(tvn_cdf(0.4, 100.0, -0.3, 0.2, 0.1, -0.4) ==
        doctest::Approx(bvn_cdf(0.4, -0.3, 0.1)).epsilon(1e-8));
}

TEST_CASE("bivariate t cdf") {
  // symmetry point
  CHECK(bvt_cdf(0.0, 0.0, 0.0, 5.0) == doctest::Approx(0.25).epsilon(1e-10));
  // conditional-decomposition oracle: P2 = int psi(t) Psi(v(x2|t)) dt
  const double x1 = 0.9, x2 = -0.4, rho = 0.55, nu = 3.5;
  const double oracle = integrate_gk(
      [&](double t) {
        const double v = std::sqrt((nu + 1.0) / (nu + t * t)) *
                         (x2 - rho * t) / std::sqrt(1.0 - rho * rho);
        return t_pdf(t, nu) * t_cdf(v, nu + 1.0);
      },
      -300.0, x1, 1e-12, 1e-12);
  CHECK(bvt_cdf(x1, x2, rho, nu) == doctest::Approx(oracle).epsilon(1e-8));
  // pdf partial vs finite differences
  const double h = 1e-5;
  const double fd =
      (bvt_pdf(x1 + h, x2, rho, nu) - bvt_pdf(x1 - h, x2, rho, nu)) / (2 * h);
  CHECK(bvt_pdf_d1(x1, x2, rho, nu) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("trivariate t cdf") {
  // marginalisation consistency
  const double pinf = std::numeric_limits<double>::infinity();
  CHECK(tvt_cdf(0.5, pinf, -0.2, 0.3, 0.2, 0.5, 4.0) ==
        doctest::Approx(bvt_cdf(0.5, -0.2, 0.2, 4.0)).epsilon(1e-8));
  // equicorrelated orthant is dof-free: matches the normal orthant
  CHECK(tvt_cdf(0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 3.0) ==
        doctest::Approx(0.25).epsilon(1e-8));
}
