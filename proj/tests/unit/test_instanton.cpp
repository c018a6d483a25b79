#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "critmag/errors.hpp"
#include "critmag/instanton.hpp"
#include "doctest.h"
#include "fixture.hpp"

using namespace critmag;
using cd = std::complex<double>;
using fixture::vec;

TEST_CASE("kappa examples") {
  CHECK(kappa(Dimension(6)) == doctest::Approx(24.0).epsilon(1e-15));
  CHECK(kappa(Dimension(5)) == doctest::Approx(7.621991).epsilon(1e-7));
  CHECK_THROWS_AS(Dimension(4), InvalidArgument);
  CHECK(Dimension(5).two_star() == doctest::Approx(10.0 / 3.0));
}

TEST_CASE("eval_bubble examples") {
  const Dimension d(5);
  const Eigen::VectorXd o = Eigen::VectorXd::Zero(5);
  CHECK(std::abs(eval_bubble(Bubble(0.0, 1.0, o), o, d) - cd(7.621991, 0.0)) < 1e-6);
  CHECK(std::abs(eval_bubble(Bubble(std::numbers::pi / 2, 1.0, o), o, d) - cd(0.0, 7.621991)) < 1e-6);
  CHECK_THROWS_AS(Bubble(0.0, 0.0, o), InvalidArgument);
  CHECK_THROWS_AS(Bubble(0.0, -1.0, o), InvalidArgument);
}

TEST_CASE("scaling identity on 100 random samples") {
  const Dimension d(5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lm(-3.0, 3.0);
  const Bubble unit = Bubble::unit(d);
  for (int s = 0; s < 100; ++s) {
    const double mu = std::exp(lm(rng));
    const Eigen::VectorXd xi = fixture::gaussian_vector(rng, 5, 2.0);
    const Eigen::VectorXd y = fixture::gaussian_vector(rng, 5, 1.5);
    const cd lhs = eval_bubble(Bubble(0.0, mu, xi), mu * y + xi, d);
    const cd rhs = std::pow(mu, -1.5) * eval_bubble(unit, y, d);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
  }
}

TEST_CASE("phase is periodic") {
  const Dimension d(5);
  const Eigen::VectorXd xi = vec({0.3, -0.1, 0.0, 0.2, 0.4});
  const Eigen::VectorXd x = vec({1.0, 0.5, -0.7, 0.1, 0.0});
  const cd a = eval_bubble(Bubble(0.7, 1.3, xi), x, d);
  const cd b = eval_bubble(Bubble(0.7 + 2 * std::numbers::pi, 1.3, xi), x, d);
  CHECK(std::abs(a - b) <= 1e-14 * std::abs(a));
}

TEST_CASE("bubble solves the critical equation") {
  for (int n : {5, 6, 7}) {
    const Dimension d(n);
    std::mt19937_64 rng(n);
    for (int s = 0; s < 20; ++s) {
      const Bubble b(0.4, 0.8, fixture::gaussian_vector(rng, n, 0.5));
      const Eigen::VectorXd x = fixture::gaussian_vector(rng, n);
      const cd z = eval_bubble(b, x, d);
      const cd rhs = std::pow(std::abs(z), d.two_star() - 2.0) * z;
      const cd res = -laplacian_bubble(b, x, d) - rhs;
      CHECK(std::abs(res) <= 1e-8 * std::abs(rhs));
    }
  }
}

TEST_CASE("grad_bubble") {
  const Dimension d(5);
  const Eigen::VectorXd xi = vec({0.5, 0.0, -0.2, 0.0, 0.1});
  const Bubble b(1.1, 0.7, xi);
  CHECK(grad_bubble(b, xi, d).norm() == 0.0);

  std::mt19937_64 rng(3);
  const double h = 1e-5;
  for (int s = 0; s < 20; ++s) {
    const Eigen::VectorXd x = xi + fixture::gaussian_vector(rng, 5);
    const Eigen::VectorXcd g = grad_bubble(b, x, d);
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd p = x, m = x;
      p[k] += h;
      m[k] -= h;
      const cd fd = (eval_bubble(b, p, d) - eval_bubble(b, m, d)) / (2 * h);
      CHECK(std::abs(fd - g[k]) <= 1e-8 * std::max(1.0, g.norm()));
    }
  }

  // |grad z_{1,0}|^2 = (2 - N)^2 kappa^2 |x|^2 / (1 + |x|^2)^N at |x| = 1.
  const Eigen::VectorXd x = vec({0.6, 0.0, 0.8, 0.0, 0.0});
  const double expect = 9.0 * std::pow(15.0, 1.5) / 32.0;
  CHECK(grad_bubble(Bubble::unit(d), x, d).squaredNorm() == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("bubble_norms: Nehari identity and the Beta-function oracle") {
  for (int n : {5, 6}) {
    const Dimension d(n);
    const BubbleNorms bn = bubble_norms(d);
    CHECK(std::abs(bn.dirichlet - bn.l2star) <= 1e-8 * bn.l2star);
    // int z_0^2 = |S^{N-1}| kappa^2 int r^{N-1} (1 + r^2)^{2-N} dr.
    const double k = kappa(d);
    const double oracle =
        d.sphere_area() * k * k * 0.5 * boost::math::beta(0.5 * n, 0.5 * n - 2.0);
    CHECK(std::abs(bn.l2 - oracle) <= 1e-8 * oracle);
  }
  const BubbleNorms b5 = bubble_norms(Dimension(5));
  CHECK(b5.l2 == doctest::Approx(900.6509490803).epsilon(1e-10));
  CHECK(b5.l2star == doctest::Approx(844.3602647627).epsilon(1e-10));
}

TEST_CASE("bubble_field reproduces the closed form") {
  const auto disc = fixture::disc5();
  const Dimension& d = disc->dim();
  const Bubble b(0.9, 2.0, vec({1.0, 0.0, 0.0, -0.5, 0.0}));
  const ComplexField u = bubble_field(b, disc);
  std::mt19937_64 rng(5);
  for (int s = 0; s < 20; ++s) {
    const Eigen::VectorXd x = b.xi + fixture::gaussian_vector(rng, 5, 2.0);
    const cd e = eval_bubble(b, x, d);
    CHECK(std::abs(u.evaluate(x) - e) <= 1e-8 * std::abs(e));
    CHECK((u.gradient(x) - grad_bubble(b, x, d)).norm() <= 1e-6 * std::abs(e));
  }
  // ||z||_E^2 is scale invariant.
  CHECK(u.e_inner(u) == doctest::Approx(bubble_norms(d).dirichlet).epsilon(1e-8));
}

TEST_CASE("tangent basis") {
  const auto disc = fixture::disc5();
  const Bubble b(0.3, 1.7, vec({0.2, -0.4, 0.0, 0.0, 1.0}));
  const TangentBasis t = tangent_basis(b, disc);
  REQUIRE(t.vectors.size() == 7);

  const ComplexField z = bubble_field(b, disc);
  const ComplexField iz = z * cd(0.0, 1.0);
  CHECK((t.phase().re() - iz.re()).norm() <= 1e-14 * iz.re().norm() + 1e-300);
  CHECK((t.phase().im() - iz.im()).norm() <= 1e-14 * iz.im().norm());

  const Eigen::MatrixXd G = t.gram();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  const double cond = svd.singularValues()[0] / svd.singularValues()[6];
  CHECK(std::isfinite(cond));
  CHECK(cond < 1e3);
  CHECK(std::abs(t.dilation().e_inner(t.phase())) <= 1e-10 * G(5, 5));
  CHECK(std::abs(G(0, 1)) <= 1e-10 * G(0, 0));

  // Finite difference of the bubble in mu.
  const double h = 1e-6;
  const Eigen::VectorXd x = b.xi + vec({0.3, 0.1, -0.2, 0.5, 0.0});
  const cd fd = (eval_bubble(Bubble(b.sigma, b.mu + h, b.xi), x, disc->dim()) -
                 eval_bubble(Bubble(b.sigma, b.mu - h, b.xi), x, disc->dim())) /
                (2 * h);
  CHECK(std::abs(t.dilation().evaluate(x) - fd) <= 1e-6 * std::abs(fd));
}
