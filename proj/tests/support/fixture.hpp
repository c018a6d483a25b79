#pragma once

#include <random>

#include "critmag/field.hpp"
#include "critmag/spectral.hpp"

namespace fixture {

// The desk-scale discretization: N = 5, K_max = 8, 64 radial nodes.
inline const critmag::Dimension& dim5() {
  static const critmag::Dimension d(5);
  return d;
}

inline critmag::DiscretizationPtr disc5() {
  static const critmag::DiscretizationPtr d = critmag::Discretization::create(dim5());
  return d;
}

inline critmag::HessianPtr hess5() {
  static const critmag::HessianPtr h = critmag::build_hessian_blocks(disc5());
  return h;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

inline Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::VectorXd x(n);
  for (int k = 0; k < n; ++k) x[k] = g(rng);
  return x;
}

}  // namespace fixture
