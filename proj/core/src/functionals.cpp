#include "critmag/functionals.hpp"

#include <cmath>

#include "critmag/errors.hpp"

namespace critmag {

void sample_frame_potentials(const Discretization& disc, const Frame& frame, int q,
                             const MagneticPotential* A, const ElectricPotential* V,
                             FramePotentials& out) {
  const double mu = frame.mu;
  const double r = disc.radial().nodes()[q];
  const Eigen::MatrixXd& P = disc.sphere().points();
  const long n = P.rows(), m = P.cols();
  if (A) {
    out.A.resize(m, n);
    out.div.resize(m);
  }
  if (V) out.V.resize(m);
  // Cache-sized chunks keep the family evaluators out of main memory.
  constexpr long chunk = 1024;
  Eigen::MatrixXd X, Ac;
  Eigen::VectorXd dc, vc;
  for (long p0 = 0; p0 < m; p0 += chunk) {
    const long c = std::min(chunk, m - p0);
    X.resize(c, n);
    for (long k = 0; k < n; ++k)
      X.col(k) = ((mu * r) * P.row(k).segment(p0, c).transpose()).array() + frame.xi[k];
    if (A) {
      A->sample(X, Ac, dc);
      out.A.middleRows(p0, c) = mu * Ac;
      out.div.segment(p0, c) = (mu * mu) * dc;
    }
    if (V) {
      V->sample(X, vc);
      out.V.segment(p0, c) = (mu * mu) * vc;
    }
  }
}

namespace {

template <class Body>
void for_each_slab(const ComplexField& u, bool gradient, Body&& body) {
  const Discretization& d = *u.disc();
  const int slab = std::max(1, d.params().slab);
  for (int q0 = 0; q0 < d.n_radial(); q0 += slab) {
    const int q1 = std::min(d.n_radial(), q0 + slab);
    body(sample_slab(u, q0, q1, gradient));
  }
}

// Row-wise omega . A with omega the columns of P.
Eigen::ArrayXd omega_dot(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A) {
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(A.rows());
  for (long k = 0; k < A.cols(); ++k) s += P.row(k).transpose().array() * A.col(k).array();
  return s;
}

double weighted_sum(const Discretization& d, int q, const Eigen::ArrayXd& f) {
  return d.radial_measure()[q] * (d.sphere().weights().array() * f).sum();
}

}  // namespace

double f0(const ComplexField& u) {
  const Discretization& d = *u.disc();
  const double ts = u.dim().two_star();
  double nl = 0.0;
  for_each_slab(u, false, [&](const GridSlab& s) {
    for (int j = 0; j < s.q1 - s.q0; ++j) {
      const Eigen::ArrayXd m2 = s.re.col(j).array().square() + s.im.col(j).array().square();
      nl += weighted_sum(d, s.q0 + j, m2.pow(ts / 2.0));
    }
  });
  return 0.5 * u.e_inner(u) - nl / ts;
}

double G1(const ComplexField& u, const MagneticPotential& A) {
  if (A.is_zero()) return 0.0;
  const Discretization& d = *u.disc();
  const int N = u.dim().n();
  FramePotentials fp;
  double acc = 0.0;
  for_each_slab(u, true, [&](const GridSlab& s) {
    for (int j = 0; j < s.q1 - s.q0; ++j) {
      const int q = s.q0 + j;
      sample_frame_potentials(d, u.frame(), q, &A, nullptr, fp);
      Eigen::ArrayXd f = Eigen::ArrayXd::Zero(d.n_points());
      // Re((1/i) grad u . conj(u)) = grad Im u . Re u - grad Re u . Im u
      for (int k = 0; k < N; ++k)
        f += fp.A.col(k).array() *
             (s.grad_im[k].col(j).array() * s.re.col(j).array() -
              s.grad_re[k].col(j).array() * s.im.col(j).array());
      acc += weighted_sum(d, q, f);
    }
  });
  return -acc;
}

G2Parts G2(const ComplexField& u, const MagneticPotential& A, const ElectricPotential& V) {
  G2Parts out;
  if (A.is_zero() && V.is_zero()) return out;
  const Discretization& d = *u.disc();
  FramePotentials fp;
  for_each_slab(u, false, [&](const GridSlab& s) {
    for (int j = 0; j < s.q1 - s.q0; ++j) {
      const int q = s.q0 + j;
      sample_frame_potentials(d, u.frame(), q, A.is_zero() ? nullptr : &A,
                              V.is_zero() ? nullptr : &V, fp);
      const Eigen::ArrayXd m2 = s.re.col(j).array().square() + s.im.col(j).array().square();
      if (!A.is_zero())
        out.magnetic += 0.5 * weighted_sum(d, q, fp.A.rowwise().squaredNorm().array() * m2);
      if (!V.is_zero()) out.electric += 0.5 * weighted_sum(d, q, fp.V.array() * m2);
    }
  });
  return out;
}

EnergyBreakdown energy(const ComplexField& u, const PotentialPair& pot, double eps, double alpha) {
  if (!(alpha >= 1.0 && alpha <= 2.0)) throw InvalidArgument("energy: alpha must lie in [1, 2]");
  EnergyBreakdown e;
  e.eps = eps;
  e.alpha = alpha;
  e.f0 = f0(u);
  e.g1 = G1(u, pot.A);
  const G2Parts g2 = G2(u, pot.A, pot.V);
  e.g2_magnetic = g2.magnetic;
  e.g2_electric = g2.electric;
  e.g2 = g2.total();
  if (alpha == 2.0)
    e.f_eps = e.f0 + eps * e.g1 + eps * eps * e.g2;
  else
    e.f_eps = e.f0 + eps * e.g1 + eps * eps * e.g2_magnetic + std::pow(eps, alpha) * e.g2_electric;
  return e;
}

Load grad_G1_load(const Bubble& b, const MagneticPotential& A, DiscretizationPtr disc) {
  if (b.xi.size() != disc->dim().n()) throw DimensionMismatch("grad_G1: centre dimension");
  const Frame fr = b.frame();
  Load load(disc, fr);
  if (A.is_zero()) return load;
  const Discretization& d = *disc;
  const Dimension dim = d.dim();
  const double cs = std::cos(b.sigma), sn = std::sin(b.sigma);
  const int slab = std::max(1, d.params().slab);
  FramePotentials fp;
  for (int q0 = 0; q0 < d.n_radial(); q0 += slab) {
    const int q1 = std::min(d.n_radial(), q0 + slab);
    Eigen::MatrixXd gre(d.n_points(), q1 - q0), gim(d.n_points(), q1 - q0);
    for (int q = q0; q < q1; ++q) {
      const double r = d.radial().nodes()[q];
      sample_frame_potentials(d, fr, q, &A, nullptr, fp);
      // g = e^{i sigma} i (2 z_0'(r) omega . A~ + div A~ z_0)
      const Eigen::ArrayXd s =
          2.0 * unit_bubble_dr(r, dim) *
              omega_dot(d.sphere().points(), fp.A) +
          unit_bubble(r, dim) * fp.div.array();
      gre.col(q - q0) = (-sn * s).matrix();
      gim.col(q - q0) = (cs * s).matrix();
    }
    accumulate_load(load, gre, gim, q0);
  }
  return load;
}

ComplexField grad_G1(const Bubble& b, const MagneticPotential& A, DiscretizationPtr disc) {
  return riesz(grad_G1_load(b, A, std::move(disc)));
}

ComplexField hessian_f0_apply(const Bubble& b, const ComplexField& v) {
  if (v.frame() != b.frame()) throw InvalidArgument("hessian_f0_apply: field frame differs from the bubble frame");
  const Discretization& d = *v.disc();
  const Dimension dim = v.dim();
  const double ts = dim.two_star();
  const double cs = std::cos(b.sigma), sn = std::sin(b.sigma);
  Load load(v.disc(), v.frame());
  for_each_slab(v, false, [&](const GridSlab& s) {
    const int nb = s.q1 - s.q0;
    Eigen::MatrixXd gre(d.n_points(), nb), gim(d.n_points(), nb);
    for (int j = 0; j < nb; ++j) {
      const double z = unit_bubble(d.radial().nodes()[s.q0 + j], dim);
      const double zp = std::pow(z, ts - 2.0);
      // Re(z conj v) z = z_0^2 (cos v_re + sin v_im) e^{i sigma}
      const Eigen::ArrayXd proj = cs * s.re.col(j).array() + sn * s.im.col(j).array();
      gre.col(j) = (-zp * s.re.col(j).array() - (ts - 2.0) * zp * proj * cs).matrix();
      gim.col(j) = (-zp * s.im.col(j).array() - (ts - 2.0) * zp * proj * sn).matrix();
    }
    accumulate_load(load, gre, gim, s.q0);
  });
  return v + riesz(load);
}

Load energy_gradient_load(const ComplexField& u, const PotentialPair& pot, double eps, double alpha) {
  if (!(alpha >= 1.0 && alpha <= 2.0)) throw InvalidArgument("energy_gradient: alpha must lie in [1, 2]");
  const Discretization& d = *u.disc();
  const int N = u.dim().n();
  const double ts = u.dim().two_star();
  const bool magnetic = eps != 0.0 && !pot.A.is_zero();
  const bool electric = eps != 0.0 && !pot.V.is_zero();
  const double ea = std::pow(eps, alpha);
  Load load(u.disc(), u.frame());
  FramePotentials fp;
  for_each_slab(u, magnetic, [&](const GridSlab& s) {
    const int nb = s.q1 - s.q0;
    Eigen::MatrixXd gre(d.n_points(), nb), gim(d.n_points(), nb);
    for (int j = 0; j < nb; ++j) {
      const int q = s.q0 + j;
      const Eigen::ArrayXd re = s.re.col(j).array(), im = s.im.col(j).array();
      const Eigen::ArrayXd m = (re.square() + im.square()).pow(ts / 2.0 - 1.0);
      Eigen::ArrayXd gr = -m * re, gi = -m * im;
      if (magnetic || electric)
        sample_frame_potentials(d, u.frame(), q, magnetic ? &pot.A : nullptr, electric ? &pot.V : nullptr, fp);
      if (magnetic) {
        Eigen::ArrayXd P = Eigen::ArrayXd::Zero(d.n_points()), Q = P;
        for (int k = 0; k < N; ++k) {
          P += fp.A.col(k).array() * s.grad_re[k].col(j).array();
          Q += fp.A.col(k).array() * s.grad_im[k].col(j).array();
        }
        const Eigen::ArrayXd dv = fp.div.array();
        const Eigen::ArrayXd a2 = fp.A.rowwise().squaredNorm().array();
        // 2 i eps (P + i Q) + i eps div (re + i im) + eps^2 |A|^2 u
        gr += -2.0 * eps * Q - eps * dv * im + eps * eps * a2 * re;
        gi += 2.0 * eps * P + eps * dv * re + eps * eps * a2 * im;
      }
      if (electric) {
        gr += ea * fp.V.array() * re;
        gi += ea * fp.V.array() * im;
      }
      gre.col(j) = gr.matrix();
      gim.col(j) = gi.matrix();
    }
    accumulate_load(load, gre, gim, s.q0);
  });
  return load;
}

ComplexField energy_gradient(const ComplexField& u, const PotentialPair& pot, double eps, double alpha) {
  return u + riesz(energy_gradient_load(u, pot, eps, alpha));
}

double magnetic_dirichlet(const ComplexField& u, const MagneticPotential& A, double eps) {
  const Discretization& d = *u.disc();
  const int N = u.dim().n();
  const bool magnetic = eps != 0.0 && !A.is_zero();
  FramePotentials fp;
  double acc = 0.0;
  for_each_slab(u, true, [&](const GridSlab& s) {
    for (int j = 0; j < s.q1 - s.q0; ++j) {
      const int q = s.q0 + j;
      if (magnetic) sample_frame_potentials(d, u.frame(), q, &A, nullptr, fp);
      Eigen::ArrayXd f = Eigen::ArrayXd::Zero(d.n_points());
      for (int k = 0; k < N; ++k) {
        // grad u / i - eps A u = (d Im u - eps A Re u) + i (-d Re u - eps A Im u)
        Eigen::ArrayXd a = s.grad_im[k].col(j).array(), c = -s.grad_re[k].col(j).array();
        if (magnetic) {
          a -= eps * fp.A.col(k).array() * s.re.col(j).array();
          c -= eps * fp.A.col(k).array() * s.im.col(j).array();
        }
        f += a.square() + c.square();
      }
      acc += weighted_sum(d, q, f);
    }
  });
  return acc;
}

double modulus_dirichlet(const ComplexField& u) {
  const Discretization& d = *u.disc();
  const int N = u.dim().n();
  double acc = 0.0;
  for_each_slab(u, true, [&](const GridSlab& s) {
    for (int j = 0; j < s.q1 - s.q0; ++j) {
      const Eigen::ArrayXd re = s.re.col(j).array(), im = s.im.col(j).array();
      const Eigen::ArrayXd m = (re.square() + im.square()).sqrt();
      Eigen::ArrayXd f = Eigen::ArrayXd::Zero(d.n_points());
      for (int k = 0; k < N; ++k) {
        const Eigen::ArrayXd g = re * s.grad_re[k].col(j).array() + im * s.grad_im[k].col(j).array();
        f += (m > 0.0).select(g.square() / m.square().max(1e-300), 0.0);
      }
      acc += weighted_sum(d, s.q0 + j, f);
    }
  });
  return acc;
}

}  // namespace critmag
