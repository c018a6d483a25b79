#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "critmag/field.hpp"
#include "critmag/instanton.hpp"

namespace critmag {

// Laplace-Beltrami spectrum of the round S^N.
struct SphereSpectrum {
  static std::int64_t eigenvalue(const Dimension& dim, int k);
  static std::int64_t multiplicity(const Dimension& dim, int k);
  static std::int64_t scalar_curvature(const Dimension& dim);
  // Diagonal factors of f''_0(z_0) in the E inner product on degree k:
  //   real block (lambda_k - N) / (lambda_k + N(N-2)/4),
  //   imaginary block lambda_k / (lambda_k + N(N-2)/4).
  static double real_factor(const Dimension& dim, int k);
  static double imag_factor(const Dimension& dim, int k);
};

// Coefficients on S^N harmonics F_{k,l}(theta_0) Y_a(omega), k >= l(a).
struct SphereCoefficients {
  int k_max = 0;
  Eigen::MatrixXcd c;  // (k_max + 1) x modes, unused entries zero
};

// Stereographic picture of a field: U = u / phi on S^N with
// phi(x) = (2 / (1 + |x|^2))^{(N-2)/2}. Acts on frame coordinates.
class Transplant {
 public:
  explicit Transplant(const Dimension& dim) : dim_(dim) {}

  double conformal_factor(const Eigen::VectorXd& x) const;
  // Inverse chart R^N -> S^N (north pole at infinity).
  Eigen::VectorXd to_sphere(const Eigen::VectorXd& x) const;
  Eigen::VectorXd from_sphere(const Eigen::VectorXd& zeta) const;

  SphereCoefficients transplant(const ComplexField& u) const;
  ComplexField untransplant(const SphereCoefficients& c, DiscretizationPtr disc, Frame frame) const;
  // Value of U at a point of S^N from its coefficients.
  std::complex<double> sphere_value(const SphereCoefficients& c, const AngularBasis& basis,
                                    const Eigen::VectorXd& zeta) const;

 private:
  Dimension dim_;
};

// f''_0(z_0) per angular degree: K_l v = nu diag(w z_0^{2*-2}) v is solved as a
// generalized eigenproblem with E-orthonormal vectors, and the factors are
// 1 - (2*-1) nu (real block) and 1 - nu (imaginary block).
class BlockDiagonalHessian {
 public:
  const Discretization& disc() const { return *disc_; }
  const DiscretizationPtr& disc_ptr() const { return disc_; }

  const Eigen::MatrixXd& eigenvectors(int l) const { return vectors_[l]; }
  const Eigen::VectorXd& real_factors(int l) const { return real_[l]; }
  const Eigen::VectorXd& imag_factors(int l) const { return imag_[l]; }
  double kernel_threshold() const { return threshold_; }
  // Largest deviation from the analytic S^N factors over retained degrees.
  double analytic_deviation() const { return deviation_; }

  friend std::shared_ptr<const BlockDiagonalHessian> build_hessian_blocks(DiscretizationPtr disc,
                                                                          double tolerance);

 private:
  DiscretizationPtr disc_;
  std::vector<Eigen::MatrixXd> vectors_;
  std::vector<Eigen::VectorXd> real_, imag_;
  double threshold_ = 0.0;
  double deviation_ = 0.0;
};

using HessianPtr = std::shared_ptr<const BlockDiagonalHessian>;

// Throws if a discrete factor deviates from its analytic value by more than tolerance.
HessianPtr build_hessian_blocks(DiscretizationPtr disc, double tolerance = 1e-6);

// E-Riesz representative of f''_0(z) v (fast diagonal path).
ComplexField hessian_apply(const BlockDiagonalHessian& h, const Bubble& b, const ComplexField& v);

struct LzResult {
  ComplexField phi;
  // Share of the right-hand side (squared E-norm) lying in the kernel.
  double kernel_fraction = 0.0;
  bool kernel_dominated = false;
};

// phi with f''_0(z) phi = P_perp k and phi orthogonal to T_z Z.
LzResult apply_Lz(const BlockDiagonalHessian& h, const Bubble& b, const ComplexField& k);
LzResult apply_Lz(const BlockDiagonalHessian& h, const Bubble& b, const Load& k);

// E-orthogonal projection onto the complement of the discrete kernel.
ComplexField project_off_kernel(const BlockDiagonalHessian& h, const Bubble& b, const ComplexField& v);

struct KernelCount {
  int imag_kernel = 0;
  int real_kernel = 0;
  int total() const { return imag_kernel + real_kernel; }
};

KernelCount kernel_dimension_check(const BlockDiagonalHessian& h, const Bubble& b);

}  // namespace critmag
