#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "critmag/dimension.hpp"

namespace critmag {

struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// n-point Gauss rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta.
GaussRule gauss_jacobi(int n, double alpha, double beta);

// n-point Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Mapped Gauss-Legendre nodes on (0, inf) with r = L t / (1 - t).
class RadialGrid {
 public:
  explicit RadialGrid(int count, double map_scale = 1.0);

  int size() const { return static_cast<int>(r_.size()); }
  double map_scale() const { return scale_; }
  const Eigen::VectorXd& nodes() const { return r_; }
  // Weights for integrals of the form int_0^inf F(r) dr.
  const Eigen::VectorXd& weights() const { return w_; }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& t_weights() const { return wt_; }
  // Weights for int_0^inf F(r) r^{n-1} dr.
  Eigen::VectorXd measure_weights(int n) const;

 private:
  double scale_;
  Eigen::VectorXd t_, wt_, r_, w_;
};

// Product rule on S^d: Gauss-Gegenbauer in cos(theta_j) for j = 2..d and the
// trapezoid rule in the azimuth. Points are stored azimuth-fastest.
class SphereRule {
 public:
  SphereRule(int d, int exactness);

  int dim() const { return d_; }
  int exactness() const { return exactness_; }
  int size() const { return static_cast<int>(weights_.size()); }
  // (d+1) x size
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  int n_phi() const { return static_cast<int>(phi_.size()); }
  const Eigen::VectorXd& phi() const { return phi_; }
  double phi_weight() const { return phi_weight_; }
  int n_polar() const { return n_polar_; }
  // Level j in [2, d]: nodes are cos(theta_j), weights include sin^{j-2}.
  const GaussRule& polar(int j) const { return polar_[j]; }
  // Angles (theta_j, j = 1..d with theta_1 the azimuth) of point p.
  Eigen::VectorXd angles(int p) const;

 private:
  int d_, exactness_, n_polar_ = 0;
  Eigen::VectorXd phi_;
  double phi_weight_;
  std::vector<GaussRule> polar_;
  Eigen::MatrixXd points_;
  Eigen::VectorXd weights_;
};

struct IntegrationScheme {
  enum class Mode { ProductGauss, RandomizedQmc };
  Mode mode = Mode::ProductGauss;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  std::int64_t max_points = 32'000'000;
  double map_scale = 1.0;

  void validate() const;
  static IntegrationScheme defaults_for(const Dimension& dim);
};

struct IntegrationResult {
  std::complex<double> value;
  double error = 0.0;
  std::int64_t points = 0;
};

using RnIntegrand = std::function<std::complex<double>(const Eigen::VectorXd&)>;
using SphereIntegrand = std::function<std::complex<double>(const Eigen::VectorXd&)>;

// Integral over R^N. Throws ToleranceNotMet or IntegrandFailure.
IntegrationResult integrate_rn(const RnIntegrand& f, const Dimension& dim,
                               const IntegrationScheme& scheme);

std::complex<double> integrate_sphere(const SphereIntegrand& f, int d, const SphereRule& rule);

// int_0^inf F(r) dr on the mapped grid, doubling until the change is below rel_tol.
IntegrationResult integrate_radial(const std::function<double(double)>& F, double rel_tol,
                                   double map_scale = 1.0, int max_nodes = 4096);

}  // namespace critmag
