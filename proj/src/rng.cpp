#include "specnoise/rng.hpp"

#include <cmath>
#include <numbers>

namespace specnoise {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

double Rng::laplace(double b) {
  // Inverse CDF on u in (-1/2, 1/2).
  const double u = uniform_open() - 0.5;
  const double sign = u < 0.0 ? -1.0 : 1.0;
  return -b * sign * std::log1p(-2.0 * std::abs(u));
}

}  // namespace specnoise
