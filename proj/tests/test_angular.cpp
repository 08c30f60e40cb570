#include "doctest.h"

#include <cmath>

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

}  // namespace

TEST_CASE("pseudo polar") {
  auto [r1, w1] = pseudo_polar(vec({1.0, 1.0, 1.0}));
  CHECK(r1 == doctest::Approx(3.0));
  CHECK(w1(0) == doctest::Approx(1.0 / 3.0));
  auto [r2, w2] = pseudo_polar(vec({2.0, 6.0}));
  CHECK(r2 == doctest::Approx(8.0));
  CHECK(w2(0) == doctest::Approx(0.25));
  CHECK(w2(1) == doctest::Approx(0.75));
  // exact round trip
  const Vector x = vec({0.31, 4.5, 0.07});
  auto [r, w] = pseudo_polar(x);
  for (int i = 0; i < 3; ++i)
    CHECK(r * w(i) == doctest::Approx(x(i)).epsilon(1e-15));
  CHECK_THROWS(pseudo_polar(vec({1.0, 0.0})));
}

TEST_CASE("classify partition") {
  CHECK(classify(vec({0.99, 0.005, 0.005}), 0.02).region == Region::Vertex);
  CHECK(classify(vec({0.99, 0.005, 0.005}), 0.02).a == 0);
  const PartitionLabel edge = classify(vec({0.50, 0.49, 0.01}), 0.02);
  CHECK(edge.region == Region::Edge);
  CHECK(edge.a == 0);
  CHECK(edge.b == 1);
  CHECK(classify(vec({1.0 / 3, 1.0 / 3, 1.0 / 3}), 0.02).region ==
        Region::Interior);
  // c = 0 sends everything to the interior
  CHECK(classify(vec({0.999, 0.0005, 0.0005}), 0.0).region ==
        Region::Interior);
  // corner gap points (no region's conditions) land in the interior
  CHECK(classify(vec({0.965, 0.019, 0.016}), 0.02).region == Region::Interior);
}

TEST_CASE("vertex mass values and limits") {
  QmcConfig cfg;
  // omega -> 1: no mass on the vertices
  ExtDepModel tight{corr2(1.0 - 1e-8), vec({0.0, 0.0}), 0.0, 1.0};
  MarginDerived md_t = margin_derived(tight);
  CHECK(vertex_mass(tight, md_t, 0, cfg) < 1e-3);

  // omega = 0, alpha = 0, tau = 0, d=2, nu=1: the Eq.-(18) argument is zero,
  // so the mass is the t cdf at zero; the total-mass identity below pins it
  ExtDepModel ind{corr2(0.0), vec({0.0, 0.0}), 0.0, 1.0};
  MarginDerived md_i = margin_derived(ind);
  CHECK(vertex_mass(ind, md_i, 0, cfg) == doctest::Approx(0.5).epsilon(1e-8));
  UnitFrechetV v_ind(ind);
  CHECK(total_angular_mass(v_ind, cfg) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("d=2 mass and moment constraints") {
  QmcConfig cfg;
  ExtDepModel m{corr2(0.6), vec({0.0, 0.0}), 0.0, 1.5};
  UnitFrechetV v(m);
  CHECK(total_angular_mass(v, cfg) == doctest::Approx(2.0).epsilon(1e-3));
  const Vector mom = angular_moments(v, cfg);
  CHECK(mom(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(mom(1) == doctest::Approx(1.0).epsilon(1e-3));

  // skewed pair
  ExtDepModel s{corr2(0.5), vec({2.0, -1.0}), 0.0, 2.0};
  UnitFrechetV vs(s);
  CHECK(total_angular_mass(vs, cfg) == doctest::Approx(2.0).epsilon(1e-3));
  const Vector mom_s = angular_moments(vs, cfg);
  CHECK(mom_s(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(mom_s(1) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("d=3 mass and moments, extremal-t and skewed") {
  QmcConfig cfg;
  ExtDepModel t3{corr3(0.6, 0.8, 0.7), vec({0.0, 0.0, 0.0}), 0.0, 3.0};
  UnitFrechetV vt(t3);
  CHECK(total_angular_mass(vt, cfg) == doctest::Approx(3.0).epsilon(4e-3));
  const Vector mom = angular_moments(vt, cfg);
  for (int j = 0; j < 3; ++j)
    CHECK(mom(j) == doctest::Approx(1.0).epsilon(1e-2));

  ExtDepModel s3{corr3(0.6, 0.8, 0.7), vec({-3.0, -3.0, 7.0}), 0.0, 3.0};
  UnitFrechetV vs(s3);
  CHECK(total_angular_mass(vs, cfg) == doctest::Approx(3.0).epsilon(4e-3));
  const Vector mom_s = angular_moments(vs, cfg);
  for (int j = 0; j < 3; ++j)
    CHECK(mom_s(j) == doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("rescaling constants") {
  QmcConfig cfg;
  ExtDepModel m{corr3(0.6, 0.8, 0.7), vec({0.0, 0.0, 0.0}), 0.0, 1.0};
  UnitFrechetV v(m);
  const RescalingConstants k = rescaling_constants(v, 0.02, cfg);
  CHECK(k.k_vertex == doctest::Approx(4.0 / (std::sqrt(3.0) * 4e-4)).epsilon(1e-12));
  CHECK(k.k_vertex == doctest::Approx(5773.5026918962).epsilon(1e-8));
  CHECK(k.rescaled);
  // c -> 0: the interior truncation vanishes
  const RescalingConstants k0 = rescaling_constants(v, 0.001, cfg);
  CHECK(k0.k_interior == doctest::Approx(1.0).epsilon(5e-2));
  const RescalingConstants raw = rescaling_constants(v, 0.0, cfg);
  CHECK(!raw.rescaled);
  CHECK(raw.k_interior == 1.0);
}

TEST_CASE("angular log likelihood") {
  QmcConfig cfg;
  ExtDepModel m{corr2(0.6), vec({0.0, 0.0}), 0.0, 1.5};
  UnitFrechetV v(m);
  PartitionConfig pc;
  pc.c = 0.02;
  // empty sample set
  CHECK(angular_loglik(v, {}, pc, cfg) == doctest::Approx(0.0));
  // one interior sample equals log(K_I h(w))
  AngularSample s;
  s.r = 10.0;
  s.w = vec({0.4, 0.6});
  s.label = classify(s.w, pc.c);
  CHECK(s.label.region == Region::Interior);
  const RescalingConstants k = rescaling_constants(v, pc.c, cfg);
  const double expect = std::log(k.k_interior * v.interior_density(s.w));
  CHECK(angular_loglik(v, {s}, pc, cfg) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("make_angular_samples thresholding") {
  Matrix data(6, 2);
  data << 1.0, 1.0, 5.0, 1.0, 0.5, 0.2, 10.0, 3.0, 0.1, 0.1, 2.0, 2.0;
  PartitionConfig pc;
  pc.c = 0.02;
  pc.top_k = 3;
  const auto top = make_angular_samples(data, pc);
  CHECK(top.size() == 3);
  CHECK(top[0].r == doctest::Approx(13.0));
  CHECK(top[1].r == doctest::Approx(6.0));
  CHECK(top[2].r == doctest::Approx(4.0));
  PartitionConfig pr;
  pr.c = 0.02;
  pr.r0 = 3.9;
  const auto above = make_angular_samples(data, pr);
  CHECK(above.size() == 3);
}
