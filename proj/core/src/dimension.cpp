#include "critmag/dimension.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "critmag/errors.hpp"

namespace critmag {

Dimension::Dimension(int n) : n_(n) {
  if (n <= 4) throw InvalidArgument("dimension must satisfy N > 4, got " + std::to_string(n));
}

double Dimension::sphere_area() const { return critmag::sphere_area(n_ - 1); }

double sphere_area(int d) {
  const double h = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

}  // namespace critmag
