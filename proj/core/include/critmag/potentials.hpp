#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "critmag/dimension.hpp"
#include "critmag/quadrature.hpp"

namespace critmag {

// Scattered samples for user-table potentials. Values are interpolated with a
// cubic radial basis (r^3 kernel plus a linear polynomial) and vanish outside
// the largest sample radius.
struct PotentialTable {
  Eigen::MatrixXd points;  // N x n
  Eigen::MatrixXd values;  // components x n
};

class RbfInterpolant {
 public:
  RbfInterpolant() = default;
  explicit RbfInterpolant(const PotentialTable& table);
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  double radius() const { return radius_; }

 private:
  Eigen::MatrixXd points_, coeffs_, poly_;
  double radius_ = 0.0;
};

struct MagneticSpec {
  // gaussian-envelope: A(x) = (a + b J(x - c)) exp(-lambda |x - c|^2)
  // algebraic-decay:   A(x) = (a + b J(x - c)) (1 + |x - c|^2)^{-p/2}
  // J rotates the (x_1, x_2) plane, so the b term is divergence free.
  std::string family = "gaussian-envelope";
  Eigen::VectorXd amplitude;  // a; empty selects e_1
  double lambda = 1.0;
  double power = 6.0;
  Eigen::VectorXd center;  // c; empty selects 0
  double swirl = 0.0;      // b
  PotentialTable table;    // user-table: components A_1..A_N
  PotentialTable divergence_table;
};

struct ElectricSpec {
  // gaussian:               V(x) = v exp(-lambda |x - c|^2)
  // algebraic-decay:        V(x) = v (1 + |x - c|^2)^{-p/2}
  // sign-changing-gaussian: V(x) = v (d . (x - c)) exp(-lambda |x - c|^2)
  std::string family = "gaussian";
  double amplitude = 1.0;
  Eigen::VectorXd direction;  // d; empty selects e_1
  double lambda = 1.0;
  double power = 6.0;
  Eigen::VectorXd center;
  PotentialTable table;
};

struct PotentialConfig {
  MagneticSpec A;
  ElectricSpec V;
  // Integrability exponents; 0 selects r = N/2 and s = N/4.
  double r_exponent = 0.0;
  double s_exponent = 0.0;
};

class MagneticPotential {
 public:
  using Field = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Scalar = std::function<double(const Eigen::VectorXd&)>;
  // Rows of X (points x N) -> rows of A (points x N) and entries of div.
  using Batch = std::function<void(const Eigen::MatrixXd&, Eigen::MatrixXd&, Eigen::VectorXd&)>;

  MagneticPotential(std::string family, int n, Field a, Scalar div, bool zero, Batch batch = {});
  static MagneticPotential zero(const Dimension& dim);

  const std::string& family() const { return family_; }
  int n() const { return n_; }
  bool is_zero() const { return zero_; }
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return a_(x); }
  double divergence(const Eigen::VectorXd& x) const { return div_(x); }
  void sample(const Eigen::MatrixXd& X, Eigen::MatrixXd& A, Eigen::VectorXd& div) const;

 private:
  std::string family_;
  int n_;
  Field a_;
  Scalar div_;
  bool zero_;
  Batch batch_;
};

class ElectricPotential {
 public:
  using Scalar = std::function<double(const Eigen::VectorXd&)>;
  // Rows of X (points x N) -> entries of v.
  using Batch = std::function<void(const Eigen::MatrixXd&, Eigen::VectorXd&)>;

  ElectricPotential(std::string family, Scalar v, bool zero, Batch batch = {});
  static ElectricPotential zero();

  const std::string& family() const { return family_; }
  bool is_zero() const { return zero_; }
  double operator()(const Eigen::VectorXd& x) const { return v_(x); }
  void sample(const Eigen::MatrixXd& X, Eigen::VectorXd& v) const;

 private:
  std::string family_;
  Scalar v_;
  bool zero_;
  Batch batch_;
};

struct PotentialPair {
  MagneticPotential A;
  ElectricPotential V;
  double r_exponent;
  double s_exponent;
};

// Throws InvalidArgument for unknown families, missing tables and
// non-decaying parameters (lambda <= 0, power < 0).
PotentialPair make_potential(const PotentialConfig& config, const Dimension& dim);

struct AssumptionEntry {
  std::string name;
  double estimate = 0.0;  // L^p norm, or +inf when the tail does not decay
  bool pass = false;
  double exponent = 0.0;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionEntry> entries;  // A1, A2, V in that order
  bool all_pass() const;
};

struct LpEstimate {
  double norm = 0.0;  // +inf when the tail test fails
  bool finite = false;
  std::string detail;
};

// ||f||_{L^p}. The tail test follows |f(R w)|^p R^N over R = 2^8 .. 2^16 on
// sampled directions and requires it to decay; the norm itself comes from
// integrate_rn.
LpEstimate lp_norm_estimate(const std::function<double(const Eigen::VectorXd&)>& f, double p,
                            const Dimension& dim, const IntegrationScheme& scheme);

AssumptionReport check_assumptions(const PotentialPair& pot, const Dimension& dim,
                                   const IntegrationScheme& scheme);

// Largest |div A - central difference| over a sample cloud, relative to max(1, |div A|).
double divergence_mismatch(const MagneticPotential& A, const Dimension& dim, std::uint64_t seed,
                           int samples = 64, double step = 1e-5);

}  // namespace critmag
