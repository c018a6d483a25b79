#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "critmag/dimension.hpp"
#include "critmag/field.hpp"

namespace critmag {

// A point e^{i sigma} z_{mu, xi} of the critical manifold.
struct Bubble {
  double sigma = 0.0;
  double mu = 1.0;
  Eigen::VectorXd xi;

  Bubble() = default;
  Bubble(double sigma, double mu, Eigen::VectorXd xi);
  static Bubble unit(const Dimension& dim);

  // Frame (mu, xi) in which the bubble is the unit bubble.
  Frame frame() const { return {mu, xi}; }
  std::complex<double> phase() const { return std::polar(1.0, sigma); }
};

double kappa(const Dimension& dim);

std::complex<double> eval_bubble(const Bubble& b, const Eigen::VectorXd& x, const Dimension& dim);
Eigen::VectorXcd grad_bubble(const Bubble& b, const Eigen::VectorXd& x, const Dimension& dim);
std::complex<double> laplacian_bubble(const Bubble& b, const Eigen::VectorXd& x,
                                      const Dimension& dim);

// Unit bubble z_0(r) and its radial derivative.
double unit_bubble(double r, const Dimension& dim);
double unit_bubble_dr(double r, const Dimension& dim);

struct BubbleNorms {
  double dirichlet;  // int |grad z_0|^2
  double l2;         // int z_0^2
  double l2star;     // int z_0^{2*}
};

// Radial quadrature with the analytic sphere area; throws ToleranceNotMet.
BubbleNorms bubble_norms(const Dimension& dim, double rel_tol = 1e-12);

// e^{i sigma} z_{mu, xi} as a field in its own frame.
ComplexField bubble_field(const Bubble& b, DiscretizationPtr disc);

// Derivatives of e^{i sigma} z_{mu, xi}: N translations d/dxi_j, the
// dilation d/dmu and the phase direction i e^{i sigma} z_{mu, xi}.
struct TangentBasis {
  std::vector<ComplexField> vectors;

  const ComplexField& translation(int j) const { return vectors[j]; }
  const ComplexField& dilation() const { return vectors[vectors.size() - 2]; }
  const ComplexField& phase() const { return vectors.back(); }
  Eigen::MatrixXd gram() const;
};

TangentBasis tangent_basis(const Bubble& b, DiscretizationPtr disc);

}  // namespace critmag
