#include "critmag/instanton.hpp"

#include <cmath>
#include <numbers>

#include "critmag/errors.hpp"
#include "critmag/quadrature.hpp"

namespace critmag {

Bubble::Bubble(double sigma_, double mu_, Eigen::VectorXd xi_)
    : sigma(sigma_), mu(mu_), xi(std::move(xi_)) {
  if (!(mu > 0.0)) throw InvalidArgument("Bubble: mu must be positive");
}

Bubble Bubble::unit(const Dimension& dim) { return {0.0, 1.0, Eigen::VectorXd::Zero(dim.n())}; }

double kappa(const Dimension& dim) {
  const double N = dim.n();
  return std::pow(N * (N - 2.0), (N - 2.0) / 4.0);
}

double unit_bubble(double r, const Dimension& dim) {
  const double N = dim.n();
  return kappa(dim) * std::pow(1.0 + r * r, -(N - 2.0) / 2.0);
}

double unit_bubble_dr(double r, const Dimension& dim) {
  const double N = dim.n();
  return -(N - 2.0) * kappa(dim) * r * std::pow(1.0 + r * r, -N / 2.0);
}

std::complex<double> eval_bubble(const Bubble& b, const Eigen::VectorXd& x, const Dimension& dim) {
  if (x.size() != dim.n() || b.xi.size() != dim.n())
    throw DimensionMismatch("eval_bubble: wrong vector length");
  const double N = dim.n();
  const double d2 = (x - b.xi).squaredNorm();
  const double v = kappa(dim) * std::pow(b.mu, (N - 2.0) / 2.0) *
                   std::pow(b.mu * b.mu + d2, -(N - 2.0) / 2.0);
  return b.phase() * v;
}

Eigen::VectorXcd grad_bubble(const Bubble& b, const Eigen::VectorXd& x, const Dimension& dim) {
  if (x.size() != dim.n() || b.xi.size() != dim.n())
    throw DimensionMismatch("grad_bubble: wrong vector length");
  const double N = dim.n();
  const Eigen::VectorXd y = x - b.xi;
  const double s = -(N - 2.0) * kappa(dim) * std::pow(b.mu, (N - 2.0) / 2.0) *
                   std::pow(b.mu * b.mu + y.squaredNorm(), -N / 2.0);
  return b.phase() * (s * y).cast<std::complex<double>>();
}

std::complex<double> laplacian_bubble(const Bubble& b, const Eigen::VectorXd& x,
                                      const Dimension& dim) {
  // z = c (mu^2 + r^2)^{-a}, a = (N-2)/2:
  //   Delta z = -2 a c N (mu^2 + r^2)^{-a-1} + 4 a (a+1) c r^2 (mu^2 + r^2)^{-a-2}
  const double N = dim.n();
  const double a = (N - 2.0) / 2.0;
  const double c = kappa(dim) * std::pow(b.mu, a);
  const double r2 = (x - b.xi).squaredNorm();
  const double m = b.mu * b.mu + r2;
  const double v = -2.0 * a * c * N * std::pow(m, -a - 1.0) + 4.0 * a * (a + 1.0) * c * r2 * std::pow(m, -a - 2.0);
  return b.phase() * v;
}

BubbleNorms bubble_norms(const Dimension& dim, double rel_tol) {
  const double N = dim.n();
  const double area = dim.sphere_area();
  const double ts = dim.two_star();
  auto grad2 = [&](double r) {
    const double g = unit_bubble_dr(r, dim);
    return g * g * std::pow(r, N - 1.0);
  };
  auto l2 = [&](double r) {
    const double z = unit_bubble(r, dim);
    return z * z * std::pow(r, N - 1.0);
  };
  auto crit = [&](double r) { return std::pow(unit_bubble(r, dim), ts) * std::pow(r, N - 1.0); };
  BubbleNorms out;
  out.dirichlet = area * integrate_radial(grad2, rel_tol).value.real();
  out.l2 = area * integrate_radial(l2, rel_tol).value.real();
  out.l2star = area * integrate_radial(crit, rel_tol).value.real();
  return out;
}

ComplexField bubble_field(const Bubble& b, DiscretizationPtr disc) {
  const Dimension dim = disc->dim();
  const std::complex<double> ph = b.phase();
  return ComplexField::radial(disc, b.frame(), [&](double r) { return ph * unit_bubble(r, dim); });
}

Eigen::MatrixXd TangentBasis::gram() const {
  const int n = static_cast<int>(vectors.size());
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) g(i, j) = g(j, i) = vectors[i].e_inner(vectors[j]);
  return g;
}

TangentBasis tangent_basis(const Bubble& b, DiscretizationPtr disc) {
  const Dimension dim = disc->dim();
  const int N = dim.n();
  const double mu = b.mu;
  const std::complex<double> ph = b.phase();
  const Frame fr = b.frame();
  TangentBasis tb;
  // In the frame, physical derivatives become
  //   d/dxi_j -> -(1/mu) d_j z_0(y),   d/dmu -> (1/mu)(-(N-2)/2 z_0 - y . grad z_0).
  for (int j = 0; j < N; ++j) {
    tb.vectors.push_back(ComplexField::sample(disc, fr, [&](const Eigen::VectorXd& y) {
      const double r = y.norm();
      const double g = (r > 0.0) ? unit_bubble_dr(r, dim) * y[j] / r : 0.0;
      return ph * (-g / mu);
    }));
  }
  tb.vectors.push_back(ComplexField::radial(disc, fr, [&](double r) {
    return ph * ((-(N - 2.0) / 2.0 * unit_bubble(r, dim) - r * unit_bubble_dr(r, dim)) / mu);
  }));
  tb.vectors.push_back(ComplexField::radial(disc, fr, [&](double r) {
    return std::complex<double>(0.0, 1.0) * ph * unit_bubble(r, dim);
  }));
  return tb;
}

}  // namespace critmag
