#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "critmag/functionals.hpp"
#include "critmag/melnikov.hpp"

namespace critmag {

enum class CriticalKind { Min, Max, Saddle };

const char* to_string(CriticalKind k);

struct CriticalPoint {
  double mu = 0.0;
  Eigen::VectorXd xi;
  Eigen::VectorXd t;  // slice coordinates
  double value = 0.0;
  CriticalKind kind = CriticalKind::Saddle;
  // Central-difference norm of (mu dGamma/dmu, dGamma/dt).
  double gradient_norm = 0.0;
  // Distance in (log mu, t) to the nearest other point or the box boundary.
  double basin_radius = 0.0;

  Bubble bubble() const { return Bubble(0.0, mu, xi); }
};

struct SearchOptions {
  int max_starts = 8;
  // 0 selects 1e-5 * max |Gamma| over the landscape.
  double grad_tol = 0.0;
  double merge_fraction = 0.05;  // of the box diagonal in (log mu, t)
  double log_mu_step = 1e-3;
  double xi_step = 1e-3;
  int simplex_iterations = 300;
  int polish_iterations = 60;
};

struct SearchResult {
  std::vector<CriticalPoint> points;  // sorted by value, then mu
  bool flat = false;
  std::string diagnostic;
  // Scan-resolution notes, e.g. a grid extremum on the mu_min row: critical
  // points closer to mu = 0 are not resolved by the scan.
  std::vector<std::string> warnings;
  double merge_radius = 0.0;
};

// Multistart refinement from the grid's interior local extrema: simplex
// search, then quasi-Newton polish with central-difference gradients.
SearchResult find_critical_points(const Melnikov& m, const GammaLandscape& landscape,
                                  const SearchOptions& opt = {});

// Gradient and Hessian of Gamma in (log mu, t) by central differences.
struct LocalDerivatives {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};
LocalDerivatives gamma_derivatives(const Melnikov& m, const ScanBox& box, const Eigen::VectorXd& p,
                                   const SearchOptions& opt = {});

struct ReducedSolution {
  double eps = 0.0;
  Bubble bubble;
  ComplexField correction;  // phi
  ComplexField u;           // z + eps phi
  EnergyBreakdown energy;
  double residual_perp = 0.0;
  double residual_tangent = 0.0;
};

// u = z + eps phi with phi = -L_z G1'(z). Throws InvalidArgument unless 0 <= eps <= eps_max.
ReducedSolution assemble_solution(const Melnikov& m, const Bubble& b, double eps, double eps_max = 0.1);
inline ReducedSolution assemble_solution(const Melnikov& m, const CriticalPoint& cp, double eps,
                                         double eps_max = 0.1) {
  return assemble_solution(m, cp.bubble(), eps, eps_max);
}

struct ResidualSplit {
  double perp = 0.0;
  double tangent = 0.0;
  double total = 0.0;
};

// E-dual norm of f'_eps(u), split along and across T_z Z.
ResidualSplit pde_residual(const Melnikov& m, const ReducedSolution& sol);

}  // namespace critmag
