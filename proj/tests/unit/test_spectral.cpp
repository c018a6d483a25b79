#include <cmath>
#include <random>

#include "critmag/errors.hpp"
#include "critmag/functionals.hpp"
#include "critmag/spectral.hpp"
#include "doctest.h"
#include "fixture.hpp"
#include "galerkin.hpp"

using namespace critmag;
using cd = std::complex<double>;
using fixture::vec;

namespace {

const Dimension& d5() { return fixture::dim5(); }

ComplexField random_coefficients(std::mt19937_64& rng, const Frame& f) {
  std::normal_distribution<double> g;
  ComplexField u(fixture::disc5(), f);
  for (int q = 0; q < u.re().cols(); ++q) {
    // Profiles with a smooth envelope keep the E-norm moderate.
    const double r = fixture::disc5()->radial().nodes()[q];
    const double env = std::exp(-0.5 * r * r);
    for (int a = 0; a < u.re().rows(); ++a) {
      u.re()(a, q) = env * g(rng);
      u.im()(a, q) = env * g(rng);
    }
  }
  return u;
}

}  // namespace

TEST_CASE("SphereSpectrum tables") {
  for (int n : {5, 6, 7}) {
    const Dimension d(n);
    for (int k = 0; k <= 10; ++k) CHECK(SphereSpectrum::eigenvalue(d, k) == k * (k + n - 1));
    CHECK(SphereSpectrum::multiplicity(d, 0) == 1);
    CHECK(SphereSpectrum::multiplicity(d, 1) == n + 1);
    CHECK(SphereSpectrum::scalar_curvature(d) == n * (n - 1));
    CHECK(SphereSpectrum::real_factor(d, 1) == 0.0);
    CHECK(SphereSpectrum::imag_factor(d, 0) == 0.0);
    CHECK(SphereSpectrum::real_factor(d, 0) < 0.0);
    for (int k = 2; k <= 10; ++k) {
      CHECK(SphereSpectrum::real_factor(d, k) > 0.0);
      CHECK(SphereSpectrum::imag_factor(d, k) > 0.0);
    }
  }
  // Branching S^N -> S^{N-1}: the field basis (degrees <= K on S^{N-1}) has mult(K)
  // modes, and the sphere coefficient slots (k, a) with l(a) <= k number sum_k mult(k).
  const auto disc = fixture::disc5();
  CHECK(disc->n_modes() == SphereSpectrum::multiplicity(d5(), disc->k_max()));
  long slots = 0, total = 0;
  for (int k = 0; k <= disc->k_max(); ++k) {
    total += SphereSpectrum::multiplicity(d5(), k);
    for (int l = 0; l <= k; ++l) slots += static_cast<long>(disc->modes_of_degree(l).size());
  }
  CHECK(slots == total);
}

TEST_CASE("transplant of the bubble is constant") {
  const auto disc = fixture::disc5();
  const Transplant T(d5());
  const double c0 = kappa(d5()) / std::pow(2.0, 1.5);
  const ComplexField z = bubble_field(Bubble::unit(d5()), disc);
  const SphereCoefficients c = T.transplant(z);
  const SphereCoefficients ci = T.transplant(z * cd(0.0, 1.0));
  std::mt19937_64 rng(2);
  for (int s = 0; s < 20; ++s) {
    Eigen::VectorXd zeta = fixture::gaussian_vector(rng, 6);
    zeta.normalize();
    CHECK(std::abs(T.sphere_value(c, disc->angular(), zeta) - c0) < 1e-9 * c0);
    CHECK(std::abs(T.sphere_value(ci, disc->angular(), zeta) - cd(0.0, c0)) < 1e-9 * c0);
  }
  // The chart and its inverse.
  const Eigen::VectorXd x = vec({0.3, -1.2, 0.5, 2.0, 0.1});
  CHECK((T.from_sphere(T.to_sphere(x)) - x).norm() < 1e-13);
  CHECK(T.to_sphere(x).norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(T.conformal_factor(x) == doctest::Approx(std::pow(2.0 / (1.0 + x.squaredNorm()), 1.5)));
}

TEST_CASE("transplant round trip") {
  const auto disc = fixture::disc5();
  const Transplant T(d5());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  SphereCoefficients c;
  c.k_max = disc->k_max();
  c.c = Eigen::MatrixXcd::Zero(c.k_max + 1, disc->n_modes());
  for (int a = 0; a < disc->n_modes(); ++a)
    for (int k = disc->degree_of_mode(a); k <= c.k_max; ++k) c.c(k, a) = cd(g(rng), g(rng));
  const ComplexField u = T.untransplant(c, disc, Frame::unit(d5()));
  const SphereCoefficients back = T.transplant(u);
  CHECK((back.c - c.c).norm() <= 1e-9 * c.c.norm());
  const ComplexField again = T.untransplant(back, disc, Frame::unit(d5()));
  CHECK((again - u).e_norm() <= 1e-9 * u.e_norm());
}

TEST_CASE("diagonal blocks agree with the dense Galerkin oracle") {
  const auto disc = fixture::disc5();
  const auto h = fixture::hess5();
  const galerkin::DenseBlocks D = galerkin::assemble(disc);
  CHECK(D.coupling < 1e-10);
  for (int l = 0; l <= disc->k_max(); ++l) {
    Eigen::VectorXd re = h->real_factors(l), im = h->imag_factors(l);
    std::sort(re.data(), re.data() + re.size());
    std::sort(im.data(), im.data() + im.size());
    CHECK((galerkin::eigenvalues(D.real[l]) - re).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((galerkin::eigenvalues(D.imag[l]) - im).cwiseAbs().maxCoeff() < 1e-6);
  }
  CHECK(h->analytic_deviation() < 1e-10);
}

TEST_CASE("kernel dimensions") {
  const KernelCount k = kernel_dimension_check(*fixture::hess5(), Bubble(0.4, 2.0, vec({1, 0, 0, 0, 0})));
  CHECK(k.imag_kernel == 1);
  CHECK(k.real_kernel == 6);
  CHECK(k.total() == 7);

  const Dimension d6(6);
  DiscretizationParams p;
  p.k_max = 4;
  p.radial_nodes = 48;
  const auto h6 = build_hessian_blocks(Discretization::create(d6, p));
  const KernelCount k6 = kernel_dimension_check(*h6, Bubble::unit(d6));
  CHECK(k6.imag_kernel == 1);
  CHECK(k6.real_kernel == 7);
  CHECK(k6.total() == 8);
}

TEST_CASE("apply_Lz: closed-form solve") {
  const auto disc = fixture::disc5();
  const auto h = fixture::hess5();
  const Dimension& d = d5();
  const Bubble b = Bubble::unit(d);
  const Eigen::VectorXd a = vec({0.7, -0.2, 0.0, 0.4, 0.1});
  // Load density (2 / i) grad z_0 . a.
  Load k(disc, b.frame());
  {
    const ComplexField src = ComplexField::sample(disc, b.frame(), [&](const Eigen::VectorXd& y) {
      const double r = y.norm();
      return r > 0 ? cd(0.0, -2.0 * unit_bubble_dr(r, d) * a.dot(y) / r) : cd(0.0);
    });
    // Pairing Re int g conj(v) on the grid equals the L^2-type load of src.
    k = Load(disc, b.frame());
    const Eigen::VectorXd& w = disc->radial_measure();
    for (int q = 0; q < disc->n_radial(); ++q) {
      k.re.col(q) = src.re().col(q) * w[q];
      k.im.col(q) = src.im().col(q) * w[q];
    }
  }
  const LzResult res = apply_Lz(*h, b, k);
  const ComplexField expect = ComplexField::sample(disc, b.frame(), [&](const Eigen::VectorXd& y) {
    return cd(0.0, unit_bubble(y.norm(), d) * a.dot(y));
  });
  CHECK((res.phi - expect).e_norm() <= 1e-4 * expect.e_norm());
  CHECK_FALSE(res.kernel_dominated);

  // Tangent vectors solve to zero.
  const Bubble bb(0.3, 0.5, vec({0.2, 0, 0, 0, 0}));
  const TangentBasis t = tangent_basis(bb, disc);
  for (const auto& v : t.vectors) {
    const LzResult r = apply_Lz(*h, bb, v);
    CHECK(r.phi.e_norm() < 1e-8 * v.e_norm());
    CHECK(r.kernel_dominated);
  }
}

TEST_CASE("apply_Lz residual and orthogonality on random loads") {
  const auto h = fixture::hess5();
  const auto disc = fixture::disc5();
  std::mt19937_64 rng(5);
  const Bubble b(1.2, 0.7, vec({0.0, 0.3, -0.1, 0.0, 0.0}));
  const TangentBasis t = tangent_basis(b, disc);
  for (int s = 0; s < 3; ++s) {
    const ComplexField k = random_coefficients(rng, b.frame());
    const LzResult r = apply_Lz(*h, b, k);
    const ComplexField lhs = hessian_f0_apply(b, r.phi);
    const ComplexField rhs = project_off_kernel(*h, b, k);
    CHECK((lhs - rhs).e_norm() <= 1e-6 * k.e_norm());
    for (const auto& v : t.vectors) CHECK(std::abs(r.phi.e_inner(v)) <= 1e-8 * r.phi.e_norm() * v.e_norm());
  }
}

TEST_CASE("L_z scaling covariance") {
  const auto h = fixture::hess5();
  const auto disc = fixture::disc5();
  const Dimension& d = d5();
  const double mu = 0.35;
  const Eigen::VectorXd xi = vec({0.5, 0.0, 0.2, 0.0, -0.4});
  auto g = [](const Eigen::VectorXd& y) {
    return cd(y[0] * std::exp(-y.squaredNorm()), (1.0 + y[1] * y[2]) * std::exp(-0.5 * y.squaredNorm()));
  };
  // k given in physical coordinates, rescaled as k*(y) = mu^{N/2-1} k(mu y + xi).
  const ComplexField k_phys = ComplexField::sample(disc, Frame{mu, xi}, g);
  const ComplexField k_unit = ComplexField::sample(disc, Frame::unit(d), g);
  const LzResult a = apply_Lz(*h, Bubble(0.0, mu, xi), k_phys);
  const LzResult b = apply_Lz(*h, Bubble::unit(d), k_unit);
  std::mt19937_64 rng(8);
  for (int s = 0; s < 10; ++s) {
    const Eigen::VectorXd y = fixture::gaussian_vector(rng, 5);
    const cd lhs = std::pow(mu, 1.5) * a.phi.evaluate(mu * y + xi);
    const cd rhs = b.phi.evaluate_local(y);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1e-3, std::abs(rhs)));
  }
  CHECK(a.phi.e_norm() == doctest::Approx(b.phi.e_norm()).epsilon(1e-12));
}

TEST_CASE("operator norm of L_z is independent of the bubble") {
  const auto h = fixture::hess5();
  double smallest = 1e300;
  for (int l = 0; l <= h->disc().k_max(); ++l)
    for (int k = 0; k < h->real_factors(l).size(); ++k) {
      for (double f : {h->real_factors(l)[k], h->imag_factors(l)[k]})
        if (std::abs(f) > h->kernel_threshold()) smallest = std::min(smallest, std::abs(f));
    }
  std::vector<double> norms;
  for (double mu : {0.1, 1.0, 10.0})
    for (double t : {-1.0, 0.0, 2.0}) {
      const Bubble b(0.0, mu, vec({t, 0.0, 0.5 * t, 0.0, 0.0}));
      std::mt19937_64 rng(99);
      ComplexField v = random_coefficients(rng, b.frame());
      double est = 0.0;
      for (int it = 0; it < 200; ++it) {
        const ComplexField w = apply_Lz(*h, b, v).phi;
        est = w.e_norm() / v.e_norm();
        v = w * (1.0 / w.e_norm());
      }
      norms.push_back(est);
    }
  for (double n : norms) CHECK(n == doctest::Approx(norms.front()).epsilon(1e-6));
  CHECK(norms.front() == doctest::Approx(1.0 / smallest).epsilon(1e-6));
  CHECK(1.0 / smallest == doctest::Approx(1.0 / SphereSpectrum::real_factor(d5(), 2)).epsilon(1e-8));
}

TEST_CASE("build_hessian_blocks rejects an inconsistent tolerance") {
  DiscretizationParams p;
  p.k_max = 2;
  p.radial_nodes = 16;
  CHECK_THROWS_AS(build_hessian_blocks(Discretization::create(d5(), p), 1e-300), Error);
}
