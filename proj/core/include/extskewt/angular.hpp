#pragma once

#include <optional>
#include <vector>

#include "extskewt/tderiv.hpp"

// Angular measure machinery on the unit simplex: pseudo-polar transform,
// c-threshold partition, the three density families (interior, vertex mass,
// edge), rescaling constants and the rescaled angular log-likelihood.

namespace extskewt {

enum class Region { Vertex, Edge, Interior };

struct PartitionLabel {
  Region region = Region::Interior;
  int a = -1, b = -1;  // vertex index, or edge pair {a, b}
};

struct AngularSample {
  double r = 0.0;
  Vector w;
  PartitionLabel label;
};

struct PartitionConfig {
  double c = 0.02;        // simplex threshold, in [0, 0.1]
  int top_k = 100;        // keep the top_k largest radii...
  double r0 = -1.0;       // ...or everything above r0 when r0 > 0

  void validate() const;
};

struct RescalingConstants {
  double k_vertex = 1.0;
  double k_edge[3][3] = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
  double k_interior = 1.0;
  bool rescaled = false;  // false when c = 0 (raw densities)
};

// r = sum x_j, w = x / r; every x_j must be positive
std::pair<double, Vector> pseudo_polar(const Vector& x);

// c-threshold partition of the d = 2, 3 simplex; uncovered gap points go to
// the interior
PartitionLabel classify(const Vector& w, double c);

// point mass on vertex j
double vertex_mass(const ExtDepModel& model, const MarginDerived& md, int j,
                   const QmcConfig& cfg);

// interior density and (d = 3) edge densities live on UnitFrechetV;
// these free functions adapt them to the spec operation signatures
double interior_density(const UnitFrechetV& v, const Vector& w);
double edge_density(const UnitFrechetV& v, int i, int j, double t);

// 1-D mass of an edge density, endpoint singularities handled by a power
// substitution
double edge_mass(const UnitFrechetV& v, int i, int j, double tol = 1e-8);

// rescaling constants at threshold c (c = 0 returns the raw configuration)
RescalingConstants rescaling_constants(const UnitFrechetV& v, double c,
                                       const QmcConfig& cfg);

// rescaled angular log-likelihood; bad_index (optional) receives the first
// sample whose density vanished, and the log-likelihood is -inf then
double angular_loglik(const UnitFrechetV& v,
                      const std::vector<AngularSample>& samples,
                      const PartitionConfig& pc, const QmcConfig& cfg,
                      int* bad_index = nullptr);

// pseudo-polar decomposition + radial thresholding + labels for a block of
// unit-Frechet observations
std::vector<AngularSample> make_angular_samples(const Matrix& data,
                                                const PartitionConfig& pc);

// spectral accounting used by the validation suite: total mass (= d) and
// first moments (= 1 each) of the angular measure
double total_angular_mass(const UnitFrechetV& v, const QmcConfig& cfg,
                          double tol = 1e-5);
Vector angular_moments(const UnitFrechetV& v, const QmcConfig& cfg,
                       double tol = 1e-5);

}  // namespace extskewt
