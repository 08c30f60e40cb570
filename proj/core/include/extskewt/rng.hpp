#pragma once

#include <cstdint>
#include <random>

#include "extskewt/special.hpp"

namespace extskewt {

// Deterministic RNG wrapper.  Normal draws go through the inverse cdf so
// streams are bit-identical across platforms, unlike std::normal_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform on (0, 1)
  double uniform() {
    const std::uint64_t u = gen_() >> 11;
    return (static_cast<double>(u) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() { return norm_quantile(uniform()); }

  double chisq(double nu) {
    const double r = chi_quantile(uniform(), nu);
    return r * r;
  }

  // exponential with unit rate
  double exponential() { return -std::log(uniform()); }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace extskewt
