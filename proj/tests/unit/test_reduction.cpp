#include <cmath>

#include "critmag/errors.hpp"
#include "critmag/reduction.hpp"
#include "doctest.h"
#include "fixture.hpp"

using namespace critmag;
using cd = std::complex<double>;
using fixture::vec;

namespace {

const Dimension& d5() { return fixture::dim5(); }

Melnikov make(const PotentialConfig& c) {
  return Melnikov(make_potential(c, d5()), fixture::disc5(), fixture::hess5());
}

const Melnikov& sign_changing() {
  static const Melnikov m = [] {
    PotentialConfig c;
    c.V.family = "sign-changing-gaussian";
    return make(c);
  }();
  return m;
}

ScanBox small_box() {
  ScanBox b;
  b.mu_min = 0.1;
  b.mu_max = 5.0;
  b.mu_count = 8;
  b.t_min = -3.0;
  b.t_max = 3.0;
  b.t_count = 13;
  return b;
}

const SearchResult& sign_changing_points() {
  static const SearchResult r = find_critical_points(sign_changing(), scan_landscape(sign_changing(), small_box()));
  return r;
}

Eigen::Vector2d coords(double mu, double t) { return {std::log(mu), t}; }

}  // namespace

TEST_CASE("one-signed V: a single interior minimum matching a dense-grid oracle") {
  PotentialConfig c;
  c.A.amplitude = Eigen::VectorXd::Zero(5);
  c.V.amplitude = -1.0;
  const Melnikov m = make(c);
  ScanBox box;
  box.mu_min = 0.1;
  box.mu_max = 10.0;
  box.mu_count = 8;
  box.t_min = -2.0;
  box.t_max = 2.0;
  box.t_count = 9;
  const SearchResult r = find_critical_points(m, scan_landscape(m, box));
  REQUIRE(r.points.size() == 1);
  const CriticalPoint& p = r.points.front();
  CHECK(p.kind == CriticalKind::Min);
  CHECK(p.value < 0.0);
  CHECK(std::abs(p.t[0]) < 1e-3);
  CHECK(r.warnings.empty());

  // Brute force over the (log mu, t) slice, spacing below the merge radius.
  double best = 1e300;
  Eigen::Vector2d arg;
  for (int i = 0; i < 25; ++i) {
    const double mu = 0.1 * std::pow(100.0, i / 24.0);
    for (int j = 0; j <= 20; ++j) {
      const double t = -1.0 + 0.1 * j;
      const double g = m.gamma(mu, vec({t, 0, 0, 0, 0})).gamma;
      if (g < best) {
        best = g;
        arg = coords(mu, t);
      }
    }
  }
  CHECK((coords(p.mu, p.t[0]) - arg).norm() <= r.merge_radius);
  CHECK(p.value <= best);
}

TEST_CASE("sign-changing V: a maximum and a minimum of opposite sign") {
  const SearchResult& r = sign_changing_points();
  bool has_max = false, has_min = false;
  double gmax = 0.0;
  for (const auto& p : r.points) gmax = std::max(gmax, std::abs(p.value));
  for (const auto& p : r.points) {
    if (p.kind == CriticalKind::Max && p.value > 0.0) has_max = true;
    if (p.kind == CriticalKind::Min && p.value < 0.0) has_min = true;
    CHECK(p.gradient_norm < 1e-5 * gmax);
    CHECK(p.basin_radius > 0.0);
    CHECK(p.xi.size() == 5);
    CHECK(p.xi[0] == doctest::Approx(p.t[0]));
  }
  CHECK(has_max);
  CHECK(has_min);
  for (std::size_t k = 1; k < r.points.size(); ++k) CHECK(r.points[k - 1].value <= r.points[k].value);
}

TEST_CASE("critical points re-verify and the search is idempotent") {
  const SearchResult& r = sign_changing_points();
  const ScanBox box = small_box();
  double gmax = 0.0;
  for (const auto& p : r.points) gmax = std::max(gmax, std::abs(p.value));
  for (const auto& p : r.points) {
    Eigen::VectorXd x(2);
    x << std::log(p.mu), p.t[0];
    const LocalDerivatives d = gamma_derivatives(sign_changing(), box, x);
    CHECK(d.gradient.norm() < 1e-5 * gmax);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.hessian);
    if (p.kind == CriticalKind::Max) CHECK(es.eigenvalues().maxCoeff() < 0.0);
    if (p.kind == CriticalKind::Min) CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  const SearchResult again = find_critical_points(sign_changing(), scan_landscape(sign_changing(), box));
  REQUIRE(again.points.size() == r.points.size());
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    CHECK(again.points[k].mu == r.points[k].mu);
    CHECK(again.points[k].value == r.points[k].value);
    CHECK(again.points[k].kind == r.points[k].kind);
  }
}

TEST_CASE("flat landscape") {
  PotentialConfig c;
  c.A.amplitude = Eigen::VectorXd::Zero(5);
  c.V.amplitude = 0.0;
  const Melnikov m = make(c);
  ScanBox box;
  box.mu_count = 3;
  box.t_count = 3;
  const SearchResult r = find_critical_points(m, scan_landscape(m, box));
  CHECK(r.points.empty());
  CHECK(r.flat);
  CHECK(r.diagnostic.find("flat") != std::string::npos);
}

TEST_CASE("assemble_solution basics") {
  const Melnikov& m = sign_changing();
  const Bubble b(0.0, 0.9, vec({0.4, 0, 0, 0, 0}));
  const ReducedSolution s0 = assemble_solution(m, b, 0.0);
  const ComplexField z = bubble_field(b, m.disc());
  CHECK((s0.u.re() - z.re()).norm() == 0.0);
  CHECK((s0.u.im() - z.im()).norm() == 0.0);
  CHECK(s0.residual_perp < 1e-7);
  CHECK(s0.residual_tangent < 1e-7);

  const ReducedSolution a = assemble_solution(m, b, 0.08), h = assemble_solution(m, b, 0.04);
  CHECK((a.u - z).e_norm() / (h.u - z).e_norm() == doctest::Approx(2.0).epsilon(0.005));
  const TangentBasis t = tangent_basis(b, m.disc());
  for (const auto& v : t.vectors)
    CHECK(std::abs(a.correction.e_inner(v)) <= 1e-8 * a.correction.e_norm() * v.e_norm());

  CHECK_THROWS_AS(assemble_solution(m, b, 0.2), InvalidArgument);
  CHECK_THROWS_AS(assemble_solution(m, b, -0.01), InvalidArgument);
  CHECK_NOTHROW(assemble_solution(m, b, 0.2, 0.25));
}

TEST_CASE("gauge covariance of assemble_solution") {
  const Melnikov& m = sign_changing();
  const Eigen::VectorXd xi = vec({-0.3, 0.1, 0, 0, 0});
  const double s = 0.4, th = 1.3;
  const ReducedSolution a = assemble_solution(m, Bubble(s, 0.8, xi), 0.05);
  const ReducedSolution b = assemble_solution(m, Bubble(s + th, 0.8, xi), 0.05);
  const ComplexField rot = a.u * std::polar(1.0, th);
  const double scale = b.u.re().cwiseAbs().maxCoeff() + b.u.im().cwiseAbs().maxCoeff();
  CHECK((rot.re() - b.u.re()).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  CHECK((rot.im() - b.u.im()).cwiseAbs().maxCoeff() <= 1e-10 * scale);
}

TEST_CASE("expansion order and residual scaling") {
  const Melnikov& m = sign_changing();
  const Bubble b(0.0, 1.0, vec({0.3, -0.2, 0, 0, 0}));
  const double G = m.gamma(b.mu, b.xi).gamma;
  const double f0z = f0(bubble_field(b, m.disc()));
  double prev_rem = 0.0, prev_perp = 0.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    const ReducedSolution s = assemble_solution(m, b, eps);
    const double rem = std::abs(s.energy.f_eps - f0z - eps * eps * G) / (eps * eps);
    if (prev_rem > 0.0) {
      CHECK(rem < prev_rem);
      CHECK(prev_perp / s.residual_perp == doctest::Approx(4.0).epsilon(0.2));
    }
    prev_rem = rem;
    prev_perp = s.residual_perp;
  }
}

TEST_CASE("tangential residual is smaller at a critical point") {
  const SearchResult& r = sign_changing_points();
  REQUIRE_FALSE(r.points.empty());
  const CriticalPoint& p = r.points.back();
  const double eps = 0.05;
  const ReducedSolution at = assemble_solution(sign_changing(), p, eps);
  const ReducedSolution off =
      assemble_solution(sign_changing(), Bubble(0.0, 1.5 * p.mu, p.xi + vec({0.5, 0, 0, 0, 0})), eps);
  CHECK(at.residual_tangent < off.residual_tangent);
}
