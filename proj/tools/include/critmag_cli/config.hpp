#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "critmag/field.hpp"
#include "critmag/melnikov.hpp"
#include "critmag/potentials.hpp"
#include "critmag/quadrature.hpp"
#include "critmag/reduction.hpp"

namespace critmag::cli {

// Flat "key = value" configuration. Empty vector values select the
// dimension-dependent default documented next to each key.
struct RunConfig {
  int dimension = 5;
  double alpha = 2.0;
  std::vector<double> epsilon = {0.1, 0.05, 0.025};
  double eps_max = 0.1;
  std::uint64_t seed = 0;
  std::string output = "out";
  int threads = 0;

  int k_max = 8;
  int radial_nodes = 64;
  double map_scale = 1.0;

  std::string quadrature_mode = "product-gauss";
  double quadrature_rel_tol = 1e-6;
  std::int64_t quadrature_max_points = 32'000'000;

  double r_exponent = 0.0;
  double s_exponent = 0.0;
  std::string a_family = "gaussian-envelope";
  std::vector<double> a_amplitude;
  double a_lambda = 1.0;
  double a_power = 6.0;
  std::vector<double> a_center;
  double a_swirl = 0.0;
  std::string a_table;
  std::string a_divergence_table;
  std::string v_family = "gaussian";
  double v_amplitude = 1.0;
  std::vector<double> v_direction;
  double v_lambda = 1.0;
  double v_power = 6.0;
  std::vector<double> v_center;
  std::string v_table;

  double scan_mu_min = 1e-2;
  double scan_mu_max = 10.0;
  int scan_mu_count = 12;
  std::vector<double> scan_direction1;
  std::vector<double> scan_direction2;
  double scan_t_min = -5.0;
  double scan_t_max = 5.0;
  int scan_t_count = 21;

  int search_max_starts = 8;
  double search_grad_tol = 0.0;
  double search_merge_fraction = 0.05;

  std::vector<std::vector<double>> asymptotics_xi;
  double asymptotics_ratio = 1e-3;

  bool operator==(const RunConfig&) const = default;

  // Derived objects; relative table paths resolve against base_dir.
  Dimension dim() const { return Dimension(dimension); }
  DiscretizationParams discretization() const;
  IntegrationScheme scheme() const;
  PotentialConfig potential(const std::string& base_dir = ".") const;
  ScanBox scan_box() const;
  SearchOptions search() const;
  std::vector<Eigen::VectorXd> test_points() const;
};

struct KeyDoc {
  std::string key;
  std::string default_value;
  std::string doc;
};

// All keys in echo order with their defaults and one-line descriptions.
std::vector<KeyDoc> documented_keys();

// Throws ConfigError with the 1-based line and column of the offending token.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical text; parse_config(echo(c)) == c.
std::string echo(const RunConfig& c);

// Cross-field checks (vector lengths, eps list against eps_max); throws ConfigError.
void validate(const RunConfig& c);

// Whitespace-separated rows "x_1 .. x_N v_1 .. v_k"; '#' starts a comment.
PotentialTable load_table(const std::string& path, int n, int components);

}  // namespace critmag::cli
