#pragma once

#include <Eigen/Dense>

#include "critmag/field.hpp"
#include "critmag/instanton.hpp"
#include "critmag/potentials.hpp"

namespace critmag {

// Potentials on the grid of radial node q in frame coordinates y:
//   A~(y) = mu A(mu y + xi),  div A~ = mu^2 div A,  V~ = mu^2 V.
// A is points x N; unset potentials leave their members empty.
struct FramePotentials {
  Eigen::MatrixXd A;
  Eigen::VectorXd div;
  Eigen::VectorXd V;
};

void sample_frame_potentials(const Discretization& disc, const Frame& frame, int q,
                             const MagneticPotential* A, const ElectricPotential* V,
                             FramePotentials& out);

// 1/2 int |grad u|^2 - 1/2* int |u|^2*
double f0(const ComplexField& u);

// -Re (1/i) int grad u . A conj(u)
double G1(const ComplexField& u, const MagneticPotential& A);

struct G2Parts {
  double magnetic = 0.0;  // 1/2 int |A|^2 |u|^2
  double electric = 0.0;  // 1/2 int V |u|^2
  double total() const { return magnetic + electric; }
};

// The second piece appears both as "\frac{1}{2}\int |V(x)| |u|^2" and, in the splitting
// of f_eps, as "\frac{1}{2}\int V(x) |u|^{2}".
// The signed form is used here.
G2Parts G2(const ComplexField& u, const MagneticPotential& A, const ElectricPotential& V);

struct EnergyBreakdown {
  double f0 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double g2_magnetic = 0.0;
  double g2_electric = 0.0;
  double f_eps = 0.0;
  double eps = 0.0;
  double alpha = 2.0;
};

// f_eps = f0 + eps g1 + eps^2 g2 for alpha = 2; otherwise the electric part
// carries eps^alpha. alpha must lie in [1, 2].
EnergyBreakdown energy(const ComplexField& u, const PotentialPair& pot, double eps, double alpha = 2.0);

// Load of G1'(z): v -> -2 Re int (grad z / i) . A conj(v) - Re int (1/i) div A z conj(v).
Load grad_G1_load(const Bubble& b, const MagneticPotential& A, DiscretizationPtr disc);
// Its E-Riesz representative.
ComplexField grad_G1(const Bubble& b, const MagneticPotential& A, DiscretizationPtr disc);

// E-representative of f''_0(z) v from the pointwise bilinear form
//   Re int grad v . conj(grad w) - Re int |z|^{2*-2} v conj(w)
//   - (2*-2) Re int |z|^{2*-4} Re(z conj(v)) z conj(w).
ComplexField hessian_f0_apply(const Bubble& b, const ComplexField& v);

// f'_eps(u) minus the Dirichlet part, as a load:
//   2 i eps A . grad u + i eps div A u + eps^2 |A|^2 u + eps^alpha V u - |u|^{2*-2} u.
Load energy_gradient_load(const ComplexField& u, const PotentialPair& pot, double eps, double alpha = 2.0);
// E-Riesz representative of f'_eps(u).
ComplexField energy_gradient(const ComplexField& u, const PotentialPair& pot, double eps,
                             double alpha = 2.0);

// int |(grad / i - eps A) u|^2 and int |grad |u||^2.
double magnetic_dirichlet(const ComplexField& u, const MagneticPotential& A, double eps);
double modulus_dirichlet(const ComplexField& u);

}  // namespace critmag
