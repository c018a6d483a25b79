#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "critmag/field.hpp"
#include "critmag/functionals.hpp"
#include "critmag/instanton.hpp"
#include "critmag/potentials.hpp"
#include "critmag/spectral.hpp"

namespace critmag {

struct GammaSample {
  double mu = 0.0;
  Eigen::VectorXd xi;
  double gamma = 0.0;
  double g2_part = 0.0;
  double correction_part = 0.0;  // 1/2 <G1'(z), phi>
  double quadrature_error = 0.0;
  double g2_magnetic = 0.0;
  double g2_electric = 0.0;
  // -1/2 <L_z G1'(z), G1'(z)> through the E inner product of the Riesz representative.
  double correction_alt = 0.0;
  double phi_norm = 0.0;
  double kernel_fraction = 0.0;
};

// Shared state for evaluations of Gamma(mu, xi) = G2(z) - 1/2 <L_z G1'(z), G1'(z)>.
// Integrals run on the field grid of the discretization.
class Melnikov {
 public:
  Melnikov(PotentialPair pot, DiscretizationPtr disc, HessianPtr hess = nullptr);

  const PotentialPair& potentials() const { return pot_; }
  const DiscretizationPtr& disc() const { return disc_; }
  const HessianPtr& hessian() const { return hess_; }
  const Dimension& dim() const { return disc_->dim(); }

  // phi = -L_z G1'(z), orthogonal to T_z Z.
  ComplexField correction_field(const Bubble& b) const;
  // Lz result with the kernel diagnostics.
  LzResult correction_solve(const Bubble& b) const;

  // sigma only exists to exercise the gauge invariance; results are cached for sigma = 0.
  GammaSample gamma(double mu, const Eigen::VectorXd& xi, double sigma = 0.0) const;

  // 1/2 int V |z_{mu,xi}|^2 (reduced function for alpha in [1, 2)).
  double gamma_alpha(double mu, const Eigen::VectorXd& xi, double alpha) const;

  std::size_t cache_size() const;

 private:
  PotentialPair pot_;
  DiscretizationPtr disc_;
  HessianPtr hess_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<double>, GammaSample> cache_;
};

// 1/2 V(xi) int z_0^2; the magnetic contributions of G2 and of the correction cancel.
double gamma_smallmu_closed_form(const Eigen::VectorXd& xi, const PotentialPair& pot, const Dimension& dim);

struct RichardsonResult {
  std::vector<double> mu;
  std::vector<double> values;  // g(mu)
  double first_level_coarse = 0.0;
  double first_level_fine = 0.0;
  double limit = 0.0;
};

// Two-level extrapolation of g(mu) -> g(0) for g = g0 + c1 mu + c2 mu^2 + ...
// over mu = {h, h/2, h/4}: R = 2 g(h/2) - g(h), then (4 R_fine - R_coarse) / 3.
RichardsonResult richardson_limit(const std::function<double(double)>& g,
                                  const std::vector<double>& mu = {0.04, 0.02, 0.01});

struct DecayRow {
  std::string ray;  // "mu->0", "|xi|->inf", "mu->inf"
  double mu = 0.0;
  Eigen::VectorXd xi;
  double value = 0.0;  // |Gamma|, or |H2| on the mu->inf ray
  double scaled = 0.0;  // |Gamma| / mu^2 on the mu->0 ray
};

struct DecayReport {
  std::vector<DecayRow> rows;
  double interior_max = 0.0;
  double boundary_value = 0.0;  // |Gamma| at the far corner of the box
  bool small_mu_pass = false;
  bool far_xi_pass = false;
  bool large_mu_pass = false;
  bool boundary_pass = false;
  bool all_pass() const { return small_mu_pass && far_xi_pass && large_mu_pass && boundary_pass; }
};

struct DecayOptions {
  Eigen::VectorXd xi0;  // fixed centre for the mu rays; empty selects 0
  Eigen::VectorXd direction;  // |xi| ray direction; empty selects e_1
  std::vector<double> small_mu = {1e-1, 1e-2, 1e-3};
  std::vector<double> far_xi = {5.0, 10.0, 20.0};
  std::vector<double> large_mu = {5.0, 10.0, 20.0};
  double boundary_mu = 10.0;
  double boundary_xi = 20.0;
  // Interior grid for max |Gamma|: log-spaced mu and t along direction.
  std::vector<double> interior_mu = {0.1, 0.3, 1.0, 3.0};
  std::vector<double> interior_t = {-2.0, -1.0, 0.0, 1.0, 2.0};
  double boundary_ratio = 1e-3;
};

DecayReport boundary_decay_check(const Melnikov& m, const DecayOptions& opt = {});

struct ScanBox {
  double mu_min = 1e-2;
  double mu_max = 10.0;
  int mu_count = 12;
  // xi = sum_k t_k d_k over one (line) or two (plane) directions.
  std::vector<Eigen::VectorXd> directions;  // empty selects {e_1}
  double t_min = -5.0;
  double t_max = 5.0;
  int t_count = 21;

  std::vector<double> mu_values() const;
  std::vector<double> t_values() const;
  int slice_dim() const { return directions.empty() ? 1 : static_cast<int>(directions.size()); }
  Eigen::VectorXd xi_at(const Eigen::VectorXd& t, int n) const;
  void validate(int n) const;
};

struct LandscapeRow {
  GammaSample sample;
  Eigen::VectorXd t;  // slice coordinates
  bool ok = true;
  std::string error;
};

struct GammaLandscape {
  ScanBox box;
  int n = 0;
  std::vector<LandscapeRow> rows;  // mu-major
  // Row index of (mu index i, slice index j).
  int index(int i, int j) const;
  int xi_count() const;
};

// Samples evaluate in parallel; rows are assembled in mu-major order.
GammaLandscape scan_landscape(const Melnikov& m, const ScanBox& box);

}  // namespace critmag
