#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "critmag/quadrature.hpp"

namespace critmag {

// Normalised polar factor on level j of S^d:
//   c * sin(theta)^lp * C^{(lp + (j-1)/2)}_{l-lp}(cos theta),
// orthonormal in L^2(sin^{j-1} theta d theta).
double polar_factor(int j, int l, int lp, double theta);
double polar_factor_derivative(int j, int l, int lp, double theta);

// Azimuthal factor: 1/sqrt(2 pi), cos(m phi)/sqrt(pi), sin(|m| phi)/sqrt(pi).
double azimuth_factor(int m, double phi);
double azimuth_factor_derivative(int m, double phi);

// Real orthonormal hyperspherical harmonics on S^d of degree <= L built as
// products of Gegenbauer ladders. Modes are labelled by chains
// l_d >= l_{d-1} >= ... >= l_2 >= |m|.
//
// Transforms on the product rule are separable: grid values are stored as
// (rule.size() x ncol) column-major matrices, coefficients as (modes x ncol).
class AngularBasis {
 public:
  AngularBasis(int d, int max_degree, std::shared_ptr<const SphereRule> rule);

  int dim() const { return d_; }
  int max_degree() const { return L_; }
  int size() const { return static_cast<int>(chains_.size()); }
  const SphereRule& rule() const { return *rule_; }

  // Degree l_d of mode a.
  int degree(int a) const { return chains_[a][d_]; }
  // Chain entry at level j (j = 1 gives the signed azimuthal index m).
  int chain(int a, int j) const { return chains_[a][j]; }
  // Index of the mode with all chain entries zero.
  int constant_mode() const { return constant_mode_; }
  // Number of harmonics of degree exactly l on S^d.
  static long count_of_degree(int d, int l);

  Eigen::VectorXd evaluate(const Eigen::VectorXd& omega) const;
  // Values and Cartesian tangential gradients, (d+1) x modes.
  void evaluate_with_gradient(const Eigen::VectorXd& omega, Eigen::VectorXd& values,
                              Eigen::MatrixXd& gradients) const;

  // Quadrature projection: coeffs(a, c) = sum_p w_p Y_a(p) values(p, c).
  Eigen::MatrixXd analysis(const Eigen::MatrixXd& values) const;
  Eigen::MatrixXd synthesis(const Eigen::MatrixXd& coeffs) const;
  // Synthesis of d/dtheta_j (j = 1 is the azimuth).
  Eigen::MatrixXd synthesis_derivative(const Eigen::MatrixXd& coeffs, int j) const;

  // Per grid point: unit normal and scaled tangent vectors t_j / |t_j|^2 so that
  // grad_tan u = sum_j (d u / d theta_j) * tangent_dual(j).col(p).
  const Eigen::MatrixXd& tangent_dual(int j) const { return tangent_dual_[j]; }

 private:
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct Level {
    // entries of S_j: (degree, parent index in S_{j-1}); children of one parent
    // are contiguous, parents are visited in order.
    std::vector<int> degree, parent;
    std::vector<int> first_child, child_count;  // indexed by parent
  };

  Eigen::MatrixXd synthesize(const Eigen::MatrixXd& coeffs, int deriv_level) const;
  void angles_of(const Eigen::VectorXd& omega, Eigen::VectorXd& ang) const;

  int d_, L_;
  std::shared_ptr<const SphereRule> rule_;
  std::vector<std::vector<int>> chains_;
  int constant_mode_ = 0;
  std::vector<Level> levels_;
  // azimuth tables: (2L+1) x nphi, rows ordered m = 0, 1, -1, 2, -2, ...
  Eigen::MatrixXd phi_tab_, phi_tab_w_, phi_dtab_;
  // polar tables per level j and parent degree lp: (L - lp + 1) x npolar
  std::vector<std::vector<Eigen::MatrixXd>> pol_tab_, pol_tab_w_, pol_dtab_;
  std::vector<Eigen::MatrixXd> tangent_dual_;
};

}  // namespace critmag
