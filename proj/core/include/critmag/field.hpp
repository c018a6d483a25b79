#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "critmag/dimension.hpp"
#include "critmag/harmonics.hpp"
#include "critmag/quadrature.hpp"

namespace critmag {

struct DiscretizationParams {
  int k_max = 8;
  int radial_nodes = 64;
  double map_scale = 1.0;
  // Polynomial exactness of the angular rule; 0 selects 2*k_max + 6.
  int angular_exactness = 0;
  // Radial nodes processed per grid slab.
  int slab = 16;
};

// Angular harmonics on S^{N-1} of degree <= k_max times nodal radial profiles
//   B_j(t) = ((1 - t) / (1 - t_j))^{N-3} ell_j(t),   r = L t / (1 - t),
// where ell_j is the Lagrange polynomial on the Gauss nodes t_j, so that
// B_j(r_i) = delta_ij and the profiles decay like r^{-(N-3)}.
class Discretization {
 public:
  static std::shared_ptr<const Discretization> create(const Dimension& dim,
                                                      const DiscretizationParams& params = {});

  const Dimension& dim() const { return dim_; }
  const DiscretizationParams& params() const { return params_; }
  int k_max() const { return params_.k_max; }
  int n_radial() const { return radial_.size(); }
  int n_modes() const { return angular_->size(); }
  int n_points() const { return sphere_->size(); }

  const RadialGrid& radial() const { return radial_; }
  const SphereRule& sphere() const { return *sphere_; }
  const AngularBasis& angular() const { return *angular_; }

  // w_q with int F(|x|) dx ~ sum_q w_q F(r_q) * (angular integral).
  const Eigen::VectorXd& radial_measure() const { return measure_; }
  // K_l(i, j) = int (B_i' B_j' + l(l+N-2) B_i B_j / r^2) r^{N-1} dr.
  const Eigen::MatrixXd& stiffness(int l) const { return stiffness_[l]; }
  const Eigen::LLT<Eigen::MatrixXd>& stiffness_factor(int l) const { return stiffness_llt_[l]; }
  // D(i, j) = B_j'(r_i).
  const Eigen::MatrixXd& radial_derivative() const { return dr_; }

  int degree_of_mode(int a) const { return angular_->degree(a); }
  const std::vector<int>& modes_of_degree(int l) const { return by_degree_[l]; }

  // B_j(r) and dB_j/dr for all j.
  void radial_basis(double r, Eigen::VectorXd& b, Eigen::VectorXd* db = nullptr) const;

 private:
  Discretization(const Dimension& dim, const DiscretizationParams& params);

  Dimension dim_;
  DiscretizationParams params_;
  RadialGrid radial_;
  std::shared_ptr<const SphereRule> sphere_;
  std::shared_ptr<const AngularBasis> angular_;
  Eigen::VectorXd measure_, bary_;
  std::vector<Eigen::MatrixXd> stiffness_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> stiffness_llt_;
  Eigen::MatrixXd dr_;
  std::vector<std::vector<int>> by_degree_;
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

// Affine frame: physical u(x) = mu^{-(N-2)/2} u*((x - xi) / mu).
struct Frame {
  double mu = 1.0;
  Eigen::VectorXd xi;

  static Frame unit(const Dimension& dim) { return {1.0, Eigen::VectorXd::Zero(dim.n())}; }
  bool operator==(const Frame& o) const { return mu == o.mu && xi == o.xi; }
  bool operator!=(const Frame& o) const { return !(*this == o); }
};

class ComplexField;

// Linear functional v -> Re int g conj(v), stored in the nodal/harmonic
// coordinates of the frame: value = sum(re .* v.re + im .* v.im).
struct Load {
  DiscretizationPtr disc;
  Frame frame;
  Eigen::MatrixXd re, im;

  Load(DiscretizationPtr d, Frame f);
  double operator()(const ComplexField& v) const;
  Load& operator+=(const Load& o);
  Load& operator*=(double s);
};

// A complex field on R^N. Coefficients are (modes x radial nodes) matrices of
// real and imaginary parts in the stored frame.
class ComplexField {
 public:
  ComplexField(DiscretizationPtr disc, Frame frame);

  // Samples u*(y) at the grid nodes and projects on the angular harmonics.
  static ComplexField sample(DiscretizationPtr disc, Frame frame,
                             const std::function<std::complex<double>(const Eigen::VectorXd&)>& f);
  // Radial profile u*(y) = f(|y|).
  static ComplexField radial(DiscretizationPtr disc, Frame frame,
                             const std::function<std::complex<double>(double)>& f);

  const DiscretizationPtr& disc() const { return disc_; }
  const Frame& frame() const { return frame_; }
  const Dimension& dim() const { return disc_->dim(); }
  Eigen::MatrixXd& re() { return re_; }
  Eigen::MatrixXd& im() { return im_; }
  const Eigen::MatrixXd& re() const { return re_; }
  const Eigen::MatrixXd& im() const { return im_; }
  // Number of complex coefficients.
  long coefficient_count() const { return re_.size(); }

  // Values in frame coordinates y.
  std::complex<double> evaluate_local(const Eigen::VectorXd& y) const;
  Eigen::VectorXcd gradient_local(const Eigen::VectorXd& y) const;
  // Values in physical coordinates x.
  std::complex<double> evaluate(const Eigen::VectorXd& x) const;
  Eigen::VectorXcd gradient(const Eigen::VectorXd& x) const;

  // <u, v>_E = Re int grad u . conj(grad v); frames must agree.
  double e_inner(const ComplexField& o) const;
  double e_norm() const { return std::sqrt(std::max(0.0, e_inner(*this))); }
  // Share of the squared E-norm carried by degrees >= l.
  double degree_fraction_from(int l) const;

  ComplexField& operator+=(const ComplexField& o);
  ComplexField& operator-=(const ComplexField& o);
  ComplexField& operator*=(double s);
  ComplexField& operator*=(std::complex<double> s);
  ComplexField operator+(const ComplexField& o) const;
  ComplexField operator-(const ComplexField& o) const;
  ComplexField operator*(double s) const;
  ComplexField operator*(std::complex<double> s) const;

  void check_compatible(const ComplexField& o) const;

 private:
  DiscretizationPtr disc_;
  Frame frame_;
  Eigen::MatrixXd re_, im_;
};

inline ComplexField operator*(double s, const ComplexField& u) { return u * s; }
inline ComplexField operator*(std::complex<double> s, const ComplexField& u) { return u * s; }

// E-Riesz representative of a load.
ComplexField riesz(const Load& load);

// Grid values of a field on radial nodes [q0, q1): (points x (q1 - q0)).
struct GridSlab {
  int q0 = 0, q1 = 0;
  Eigen::MatrixXd re, im;
  // Cartesian gradient components in frame coordinates (N entries) when requested.
  std::vector<Eigen::MatrixXd> grad_re, grad_im;
};

GridSlab sample_slab(const ComplexField& u, int q0, int q1, bool with_gradient);

// Accumulates the load of the density g (frame coordinates, slab layout):
// load(a, q) += w_q sum_p w_p Y_a(p) g(p, q).
void accumulate_load(Load& load, const Eigen::MatrixXd& g_re, const Eigen::MatrixXd& g_im, int q0);

// Frame point y = r_q * omega_p.
inline Eigen::VectorXd grid_point(const Discretization& d, int p, int q) {
  return d.radial().nodes()[q] * d.sphere().points().col(p);
}

}  // namespace critmag
