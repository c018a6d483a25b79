#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

#include "critmag/errors.hpp"
#include "critmag/quadrature.hpp"
#include "doctest.h"

using namespace critmag;
using cd = std::complex<double>;

namespace {

// Independent closed forms for the unit bubble, N = 5.
double kappa5() { return std::pow(15.0, 0.75); }
double z0(const Eigen::VectorXd& x) { return kappa5() * std::pow(1.0 + x.squaredNorm(), -1.5); }
double area4() { return 8.0 * std::numbers::pi * std::numbers::pi / 3.0; }

}  // namespace

TEST_CASE("gauss_jacobi integrates polynomials exactly") {
  const GaussRule leg = gauss_legendre(10);
  double s = 0.0;
  for (int i = 0; i < 10; ++i) s += leg.weights[i] * std::pow(leg.nodes[i], 18);
  CHECK(s == doctest::Approx(2.0 / 19.0).epsilon(1e-14));

  const GaussRule ch2 = gauss_jacobi(6, 0.5, 0.5);
  double m0 = 0.0, m2 = 0.0;
  for (int i = 0; i < 6; ++i) {
    m0 += ch2.weights[i];
    m2 += ch2.weights[i] * ch2.nodes[i] * ch2.nodes[i];
  }
  CHECK(m0 == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  CHECK(m2 == doctest::Approx(std::numbers::pi / 8).epsilon(1e-14));

  const GaussRule asym = gauss_jacobi(8, 1.0, 0.0);
  double m1 = 0.0;
  for (int i = 0; i < 8; ++i) m1 += asym.weights[i] * asym.nodes[i];
  CHECK(m1 == doctest::Approx(-2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("RadialGrid invariants") {
  const RadialGrid g(64, 1.0);
  CHECK(g.size() == 64);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(g.weights()[i] > 0.0);
    if (i > 0) CHECK(g.nodes()[i] > g.nodes()[i - 1]);
  }
  CHECK_THROWS_AS(RadialGrid(8), InvalidArgument);
  CHECK_THROWS_AS(RadialGrid(32, 0.0), InvalidArgument);
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) s += g.weights()[i] / (1.0 + g.nodes()[i] * g.nodes()[i]);
  CHECK(s == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
}

TEST_CASE("SphereRule weights sum to the sphere area") {
  for (int d = 1; d <= 5; ++d) {
    const SphereRule r(d, 12);
    CHECK(r.weights().sum() == doctest::Approx(sphere_area(d)).epsilon(1e-12));
    for (int p = 0; p < r.size(); p += 97) CHECK(r.points().col(p).norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("integrate_sphere on S^4") {
  const SphereRule r(4, 16);
  CHECK(integrate_sphere([](const Eigen::VectorXd&) { return cd(1.0); }, 4, r).real() ==
        doctest::Approx(area4()).epsilon(1e-12));
  CHECK(std::abs(integrate_sphere([](const Eigen::VectorXd& w) { return cd(w[0]); }, 4, r)) < 1e-14);
  // moments of x_1 on S^4: E[x^2] = 1/5, E[x^4] = 3/35
  CHECK(integrate_sphere([](const Eigen::VectorXd& w) { return cd(std::pow(w[0], 4)); }, 4, r)
            .real() == doctest::Approx(3.0 * area4() / 35.0).epsilon(1e-12));
  CHECK(integrate_sphere([](const Eigen::VectorXd& w) { return cd(w[2] * w[2] * w[4] * w[4]); }, 4,
                         r)
            .real() == doctest::Approx(area4() / 35.0).epsilon(1e-12));
  CHECK_THROWS_AS(integrate_sphere([](const Eigen::VectorXd&) { return cd(1.0); }, 3, r),
                  DimensionMismatch);
}

TEST_CASE("integrate_rn reproduces the Beta-function value of the bubble L2 norm") {
  const Dimension dim(5);
  IntegrationScheme s;
  s.rel_tol = 1e-9;
  const auto res = integrate_rn([](const Eigen::VectorXd& x) { return cd(z0(x) * z0(x)); }, dim, s);
  const double oracle = area4() * std::pow(kappa5(), 2) * 0.5 * boost::math::beta(2.5, 0.5);
  CHECK(oracle == doctest::Approx(900.6509490803).epsilon(1e-10));
  CHECK(std::abs(res.value.real() - oracle) / oracle < 1e-8);
  CHECK(res.error <= 1e-9 * oracle);
}

TEST_CASE("integrate_rn: odd integrand vanishes") {
  const Dimension dim(5);
  IntegrationScheme s;
  const auto res = integrate_rn(
      [](const Eigen::VectorXd& x) { return cd(x[0] * std::exp(-x.squaredNorm())); }, dim, s);
  CHECK(std::abs(res.value) < 1e-10);
}

TEST_CASE("integrate_rn: Dirichlet energy of the bubble equals the critical norm") {
  const Dimension dim(5);
  IntegrationScheme s;
  s.rel_tol = 1e-9;
  auto grad2 = [](const Eigen::VectorXd& x) {
    const double r2 = x.squaredNorm();
    return cd(9.0 * kappa5() * kappa5() * r2 * std::pow(1.0 + r2, -5.0));
  };
  auto crit = [](const Eigen::VectorXd& x) { return cd(std::pow(z0(x), 10.0 / 3.0)); };
  const double a = integrate_rn(grad2, dim, s).value.real();
  const double b = integrate_rn(crit, dim, s).value.real();
  CHECK(std::abs(a - b) / b < 1e-8);
}

TEST_CASE("integrate_rn: refinement stays within the reported error") {
  const Dimension dim(5);
  auto f = [](const Eigen::VectorXd& x) {
    return cd((1.0 + x[0] * x[0]) * std::exp(-x.squaredNorm()) * std::cos(0.5 * x[1]));
  };
  IntegrationScheme coarse;
  coarse.rel_tol = 1e-5;
  IntegrationScheme fine;
  fine.rel_tol = 1e-9;
  const auto a = integrate_rn(f, dim, coarse);
  const auto b = integrate_rn(f, dim, fine);
  CHECK(std::abs(a.value - b.value) <= a.error);
}

TEST_CASE("integrate_rn: translation and dilation covariance") {
  const Dimension dim(5);
  IntegrationScheme s;
  s.rel_tol = 1e-8;
  auto f = [](const Eigen::VectorXd& x) {
    return cd(std::exp(-x.squaredNorm()) * (2.0 + x[0] + x[3] * x[3]));
  };
  const double mu = 1.7;
  Eigen::VectorXd xi(5);
  xi << 0.3, -0.2, 0.1, 0.0, 0.25;
  auto g = [&](const Eigen::VectorXd& x) { return f(mu * x + xi); };
  const double a = integrate_rn(f, dim, s).value.real();
  const double b = integrate_rn(g, dim, s).value.real() * std::pow(mu, 5);
  CHECK(std::abs(a - b) / std::abs(a) < 1e-7);
}

TEST_CASE("integrate_rn: qmc agrees with product rule on a battery of integrands") {
  const Dimension dim(5);
  std::vector<RnIntegrand> battery = {
      [](const Eigen::VectorXd& x) { return cd(std::exp(-x.squaredNorm())); },
      [](const Eigen::VectorXd& x) { return cd(z0(x) * z0(x)); },
      [](const Eigen::VectorXd& x) { return cd(std::pow(z0(x), 10.0 / 3.0)); },
      [](const Eigen::VectorXd& x) { return cd(std::pow(1.0 + x.squaredNorm(), -4.0)); },
      [](const Eigen::VectorXd& x) { return cd(x[0] * x[0] * std::exp(-x.squaredNorm())); },
      [](const Eigen::VectorXd& x) { return cd(std::exp(-2.0 * (x.array() - 0.2).matrix().squaredNorm())); },
      [](const Eigen::VectorXd& x) { return cd(std::exp(-x.squaredNorm()) * (1.0 + x[1])); },
      [](const Eigen::VectorXd& x) { return cd(z0(x) * std::exp(-x.squaredNorm())); },
      [](const Eigen::VectorXd& x) { return cd(1.0 / std::pow(1.0 + x.squaredNorm(), 3.5) * (1.0 + 0.5 * std::cos(x[2]) * std::exp(-x.squaredNorm()))); },
      [](const Eigen::VectorXd& x) { return cd(std::exp(-x.squaredNorm()), 0.5 * std::exp(-3.0 * x.squaredNorm())); },
  };
  IntegrationScheme pg;
  pg.rel_tol = 1e-8;
  IntegrationScheme qmc;
  qmc.mode = IntegrationScheme::Mode::RandomizedQmc;
  qmc.rel_tol = 1e-3;
  qmc.seed = 7;
  qmc.max_points = 40'000'000;
  for (std::size_t i = 0; i < battery.size(); ++i) {
    const auto& f = battery[i];
    CAPTURE(i);
    const auto a = integrate_rn(f, dim, pg);
    const auto b = integrate_rn(f, dim, qmc);
    CHECK(std::abs(a.value - b.value) <= 4.0 * (a.error + b.error));
  }
}

TEST_CASE("integrate_rn: qmc is reproducible for a fixed seed") {
  const Dimension dim(5);
  IntegrationScheme qmc;
  qmc.mode = IntegrationScheme::Mode::RandomizedQmc;
  qmc.rel_tol = 1e-3;
  qmc.seed = 42;
  auto f = [](const Eigen::VectorXd& x) { return cd(std::exp(-x.squaredNorm())); };
  const auto a = integrate_rn(f, dim, qmc);
  const auto b = integrate_rn(f, dim, qmc);
  CHECK(a.value == b.value);
  CHECK(a.error == b.error);
}

TEST_CASE("integrate_rn error reporting") {
  const Dimension dim(5);
  IntegrationScheme s;
  CHECK_THROWS_AS(integrate_rn([](const Eigen::VectorXd&) { return cd(NAN); }, dim, s),
                  IntegrandFailure);
  s.rel_tol = 1e-12;
  s.max_points = 20000;
  try {
    integrate_rn([](const Eigen::VectorXd& x) { return cd(std::exp(-x.squaredNorm()) * std::cos(9.0 * x[0])); },
                 dim, s);
    FAIL("expected ToleranceNotMet");
  } catch (const ToleranceNotMet& e) {
    CHECK(e.achieved_error > 0.0);
  }
  IntegrationScheme bad;
  bad.rel_tol = 0.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}
