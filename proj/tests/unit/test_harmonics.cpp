#include <cmath>
#include <memory>
#include <random>

#include "critmag/harmonics.hpp"
#include "doctest.h"

using namespace critmag;

namespace {

std::shared_ptr<const AngularBasis> make_basis(int d, int L) {
  auto rule = std::make_shared<const SphereRule>(d, 2 * L + 6);
  return std::make_shared<const AngularBasis>(d, L, rule);
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v.normalized();
}

}  // namespace

TEST_CASE("mode counts") {
  CHECK(AngularBasis::count_of_degree(4, 0) == 1);
  CHECK(AngularBasis::count_of_degree(4, 1) == 5);
  CHECK(AngularBasis::count_of_degree(4, 8) == 285);
  CHECK(AngularBasis::count_of_degree(2, 3) == 7);
  const auto b = make_basis(4, 8);
  CHECK(b->size() == 825);
  long by_degree = 0;
  for (int l = 0; l <= 8; ++l) {
    long c = 0;
    for (int a = 0; a < b->size(); ++a) c += (b->degree(a) == l);
    CHECK(c == AngularBasis::count_of_degree(4, l));
    by_degree += c;
  }
  CHECK(by_degree == 825);
}

TEST_CASE("orthonormality under the product rule") {
  for (int d : {2, 3, 4}) {
    const auto b = make_basis(d, 6);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(b->size(), b->size());
    const Eigen::MatrixXd gram = b->analysis(b->synthesis(I));
    CHECK((gram - I).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("addition theorem: each degree block spans the full harmonic space") {
  const auto b = make_basis(4, 5);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd w = random_unit(rng, 5);
    const Eigen::VectorXd y = b->evaluate(w);
    for (int l = 0; l <= 5; ++l) {
      double s = 0.0;
      for (int a = 0; a < b->size(); ++a)
        if (b->degree(a) == l) s += y[a] * y[a];
      CHECK(s == doctest::Approx(AngularBasis::count_of_degree(4, l) / sphere_area(4)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pointwise evaluation matches grid synthesis") {
  const auto b = make_basis(4, 6);
  std::mt19937_64 rng(11);
  Eigen::MatrixXd c = Eigen::MatrixXd::Random(b->size(), 2);
  const Eigen::MatrixXd vals = b->synthesis(c);
  for (int p = 0; p < b->rule().size(); p += 211) {
    const Eigen::VectorXd y = b->evaluate(b->rule().points().col(p));
    CHECK(std::abs(y.dot(c.col(0)) - vals(p, 0)) < 1e-12);
    CHECK(std::abs(y.dot(c.col(1)) - vals(p, 1)) < 1e-12);
  }
}

TEST_CASE("degree-one harmonics span the coordinate functions") {
  const auto b = make_basis(4, 3);
  const SphereRule& r = b->rule();
  Eigen::MatrixXd x(r.size(), 5);
  for (int p = 0; p < r.size(); ++p) x.row(p) = r.points().col(p).transpose();
  const Eigen::MatrixXd c = b->analysis(x);
  const Eigen::MatrixXd back = b->synthesis(c);
  CHECK((back - x).cwiseAbs().maxCoeff() < 1e-13);
  for (int a = 0; a < b->size(); ++a)
    if (b->degree(a) != 1) CHECK(c.row(a).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("tangential gradient matches finite differences") {
  const auto b = make_basis(4, 5);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const Eigen::VectorXd w = random_unit(rng, 5);
    Eigen::VectorXd v;
    Eigen::MatrixXd g;
    b->evaluate_with_gradient(w, v, g);
    Eigen::VectorXd e = random_unit(rng, 5);
    e -= e.dot(w) * w;
    e.normalize();
    const double h = 1e-6;
    const Eigen::VectorXd fd =
        (b->evaluate((w + h * e).normalized()) - b->evaluate((w - h * e).normalized())) / (2 * h);
    CHECK((g.transpose() * e - fd).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((g.transpose() * w).cwiseAbs().maxCoeff() < 1e-12);
  }
  // on a coordinate pole
  Eigen::VectorXd pole = Eigen::VectorXd::Zero(5);
  pole[4] = 1.0;
  Eigen::VectorXd v;
  Eigen::MatrixXd g;
  b->evaluate_with_gradient(pole, v, g);
  CHECK(g.allFinite());
}

TEST_CASE("derivative synthesis assembles the grid gradient") {
  const auto b = make_basis(4, 5);
  const SphereRule& r = b->rule();
  Eigen::MatrixXd c = Eigen::MatrixXd::Random(b->size(), 1);
  std::vector<Eigen::MatrixXd> dj(5);
  for (int j = 1; j <= 4; ++j) dj[j] = b->synthesis_derivative(c, j);
  for (int p = 0; p < r.size(); p += 173) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(5);
    for (int j = 1; j <= 4; ++j) grad += dj[j](p, 0) * b->tangent_dual(j).col(p);
    Eigen::VectorXd v;
    Eigen::MatrixXd g;
    b->evaluate_with_gradient(r.points().col(p), v, g);
    CHECK((grad - g * c.col(0)).cwiseAbs().maxCoeff() < 1e-10);
  }
}
