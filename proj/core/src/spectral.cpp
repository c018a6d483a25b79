#include "critmag/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "critmag/errors.hpp"

namespace critmag {

std::int64_t SphereSpectrum::eigenvalue(const Dimension& dim, int k) {
  return static_cast<std::int64_t>(k) * (k + dim.n() - 1);
}

std::int64_t SphereSpectrum::multiplicity(const Dimension& dim, int k) {
  // (N+k-2)! (N+2k-1) / (k! (N-1)!) = C(N+k-2, k) (N+2k-1) / (N-1)
  const std::int64_t N = dim.n();
  std::int64_t c = 1;
  for (std::int64_t i = 1; i <= k; ++i) c = c * (N - 2 + i) / i;
  return c * (N + 2 * k - 1) / (N - 1);
}

std::int64_t SphereSpectrum::scalar_curvature(const Dimension& dim) {
  return static_cast<std::int64_t>(dim.n()) * (dim.n() - 1);
}

double SphereSpectrum::real_factor(const Dimension& dim, int k) {
  const double N = dim.n();
  const double lam = static_cast<double>(eigenvalue(dim, k));
  return (lam - N) / (lam + N * (N - 2.0) / 4.0);
}

double SphereSpectrum::imag_factor(const Dimension& dim, int k) {
  const double N = dim.n();
  const double lam = static_cast<double>(eigenvalue(dim, k));
  return lam / (lam + N * (N - 2.0) / 4.0);
}

// ---------------------------------------------------------------- Transplant

double Transplant::conformal_factor(const Eigen::VectorXd& x) const {
  const double N = dim_.n();
  return std::pow(2.0 / (1.0 + x.squaredNorm()), (N - 2.0) / 2.0);
}

Eigen::VectorXd Transplant::to_sphere(const Eigen::VectorXd& x) const {
  const double r2 = x.squaredNorm();
  Eigen::VectorXd z(x.size() + 1);
  z.head(x.size()) = 2.0 * x / (1.0 + r2);
  z[x.size()] = (r2 - 1.0) / (r2 + 1.0);
  return z;
}

Eigen::VectorXd Transplant::from_sphere(const Eigen::VectorXd& zeta) const {
  const long n = zeta.size() - 1;
  return zeta.head(n) / (1.0 - zeta[n]);
}

namespace {

// theta_0 of the point at radius r: cos = (r^2-1)/(r^2+1), sin = 2r/(1+r^2).
double polar_angle(double r) { return std::atan2(2.0 * r, r * r - 1.0); }

}  // namespace

SphereCoefficients Transplant::transplant(const ComplexField& u) const {
  if (u.dim() != dim_) throw DimensionMismatch("transplant: dimension mismatch");
  const Discretization& d = *u.disc();
  const int N = dim_.n();
  SphereCoefficients out;
  out.k_max = d.k_max();
  out.c = Eigen::MatrixXcd::Zero(d.k_max() + 1, d.n_modes());
  for (int q = 0; q < d.n_radial(); ++q) {
    const double r = d.radial().nodes()[q];
    const double th = polar_angle(r);
    const double phi = std::pow(2.0 / (1.0 + r * r), (N - 2.0) / 2.0);
    const double w = d.radial_measure()[q] * std::pow(2.0 / (1.0 + r * r), N) / phi;
    for (int a = 0; a < d.n_modes(); ++a) {
      const int l = d.degree_of_mode(a);
      const std::complex<double> f(u.re()(a, q), u.im()(a, q));
      for (int k = l; k <= d.k_max(); ++k) out.c(k, a) += w * polar_factor(N, k, l, th) * f;
    }
  }
  return out;
}

ComplexField Transplant::untransplant(const SphereCoefficients& c, DiscretizationPtr disc,
                                      Frame frame) const {
  if (disc->dim() != dim_) throw DimensionMismatch("untransplant: dimension mismatch");
  if (c.c.cols() != disc->n_modes()) throw DimensionMismatch("untransplant: mode count");
  ComplexField u(disc, std::move(frame));
  const int N = dim_.n();
  for (int q = 0; q < disc->n_radial(); ++q) {
    const double r = disc->radial().nodes()[q];
    const double th = polar_angle(r);
    const double phi = std::pow(2.0 / (1.0 + r * r), (N - 2.0) / 2.0);
    for (int a = 0; a < disc->n_modes(); ++a) {
      const int l = disc->degree_of_mode(a);
      std::complex<double> f = 0.0;
      for (int k = l; k <= std::min(c.k_max, disc->k_max()); ++k)
        f += c.c(k, a) * polar_factor(N, k, l, th);
      u.re()(a, q) = phi * f.real();
      u.im()(a, q) = phi * f.imag();
    }
  }
  return u;
}

std::complex<double> Transplant::sphere_value(const SphereCoefficients& c, const AngularBasis& basis,
                                              const Eigen::VectorXd& zeta) const {
  const int N = dim_.n();
  const double th = std::acos(std::clamp(zeta[N], -1.0, 1.0));
  Eigen::VectorXd w = zeta.head(N);
  const double s = w.norm();
  Eigen::VectorXd Y;
  if (s > 0.0) {
    Y = basis.evaluate(w / s);
  } else {
    Y = Eigen::VectorXd::Zero(basis.size());
    Y[basis.constant_mode()] = 1.0 / std::sqrt(sphere_area(N - 1));
  }
  std::complex<double> v = 0.0;
  for (int a = 0; a < basis.size(); ++a)
    for (int k = basis.degree(a); k <= c.k_max; ++k) v += c.c(k, a) * polar_factor(N, k, basis.degree(a), th) * Y[a];
  return v;
}

// ---------------------------------------------------------------- Hessian blocks

HessianPtr build_hessian_blocks(DiscretizationPtr disc, double tolerance) {
  auto h = std::shared_ptr<BlockDiagonalHessian>(new BlockDiagonalHessian());
  h->disc_ = disc;
  const Dimension dim = disc->dim();
  const int n = disc->n_radial();
  const double ts = dim.two_star();
  Eigen::VectorXd W(n);
  for (int q = 0; q < n; ++q)
    W[q] = disc->radial_measure()[q] * std::pow(unit_bubble(disc->radial().nodes()[q], dim), ts - 2.0);
  const Eigen::MatrixXd Wm = W.asDiagonal();

  const int K = disc->k_max();
  h->vectors_.resize(K + 1);
  h->real_.resize(K + 1);
  h->imag_.resize(K + 1);
  double fmax = 0.0, dev = 0.0;
  std::ostringstream worst;
  for (int l = 0; l <= K; ++l) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Wm, disc->stiffness(l));
    if (es.info() != Eigen::Success) throw Error("build_hessian_blocks: eigensolver failed");
    // Ascending nu -> reverse so that factors ascend.
    const Eigen::VectorXd nu = es.eigenvalues().reverse();
    h->vectors_[l] = es.eigenvectors().rowwise().reverse();
    h->real_[l] = (1.0 - (ts - 1.0) * nu.array()).matrix();
    h->imag_[l] = (1.0 - nu.array()).matrix();
    fmax = std::max({fmax, h->real_[l].cwiseAbs().maxCoeff(), h->imag_[l].cwiseAbs().maxCoeff()});
    for (int k = l; k <= K; ++k) {
      const double er = std::abs(h->real_[l][k - l] - SphereSpectrum::real_factor(dim, k));
      const double ei = std::abs(h->imag_[l][k - l] - SphereSpectrum::imag_factor(dim, k));
      if (std::max(er, ei) > dev) {
        dev = std::max(er, ei);
        worst.str("");
        worst << "degree l=" << l << ", sphere degree k=" << k;
      }
    }
  }
  h->threshold_ = 1e-8 * fmax;
  h->deviation_ = dev;
  if (dev > tolerance) {
    std::ostringstream os;
    os << "build_hessian_blocks: diagonal factor deviates from the analytic value by " << dev
       << " at " << worst.str() << " (tolerance " << tolerance << ")";
    throw Error(os.str());
  }
  return h;
}

namespace {

void check_frame(const Bubble& b, const ComplexField& v) {
  if (v.frame() != b.frame())
    throw InvalidArgument("field frame differs from the bubble frame; build it with the bubble's frame");
}

// Rows of the modes of degree l.
Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd g(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) g.row(i) = m.row(rows[i]);
  return g;
}

void scatter(Eigen::MatrixXd& m, const std::vector<int>& rows, const Eigen::MatrixXd& g) {
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(rows[i]) = g.row(i);
}

// (re, im) -> e^{-i sigma} (re, im)
void rotate(Eigen::MatrixXd& re, Eigen::MatrixXd& im, double sigma) {
  if (sigma == 0.0) return;
  const double c = std::cos(sigma), s = std::sin(sigma);
  const Eigen::MatrixXd r = c * re + s * im;
  im = c * im - s * re;
  re = r;
}

// Applies x -> V f(d) alpha per block, where alpha are E-coordinates.
// mode 0: hessian (multiply by d), mode 1: inverse on the complement.
struct BlockResult {
  Eigen::MatrixXd re, im;
  double kernel_sq = 0.0, total_sq = 0.0;
};

BlockResult block_apply(const BlockDiagonalHessian& h, const Eigen::MatrixXd& are,
                        const Eigen::MatrixXd& aim, bool coords_are_loads, int mode) {
  const Discretization& d = h.disc();
  BlockResult out;
  out.re = Eigen::MatrixXd::Zero(d.n_modes(), d.n_radial());
  out.im = out.re;
  const double thr = h.kernel_threshold();
  for (int l = 0; l <= d.k_max(); ++l) {
    const auto& rows = d.modes_of_degree(l);
    const Eigen::MatrixXd& V = h.eigenvectors(l);
    for (int part = 0; part < 2; ++part) {
      const Eigen::MatrixXd X = gather(part == 0 ? are : aim, rows);
      // alpha rows: x^T K V for fields, L V for loads
      Eigen::MatrixXd alpha = coords_are_loads ? Eigen::MatrixXd(X * V)
                                               : Eigen::MatrixXd(X * d.stiffness(l) * V);
      const Eigen::VectorXd& f = (part == 0) ? h.real_factors(l) : h.imag_factors(l);
      for (int k = 0; k < f.size(); ++k) {
        const double a2 = alpha.col(k).squaredNorm();
        out.total_sq += a2;
        if (std::abs(f[k]) < thr) {
          out.kernel_sq += a2;
          alpha.col(k).setZero();
        } else {
          alpha.col(k) *= (mode == 0) ? f[k] : 1.0 / f[k];
        }
      }
      scatter(part == 0 ? out.re : out.im, rows, alpha * V.transpose());
    }
  }
  return out;
}

}  // namespace

ComplexField hessian_apply(const BlockDiagonalHessian& h, const Bubble& b, const ComplexField& v) {
  check_frame(b, v);
  Eigen::MatrixXd re = v.re(), im = v.im();
  rotate(re, im, b.sigma);
  BlockResult r = block_apply(h, re, im, false, 0);
  rotate(r.re, r.im, -b.sigma);
  ComplexField out(v.disc(), v.frame());
  out.re() = r.re;
  out.im() = r.im;
  return out;
}

namespace {

LzResult finish_lz(const Bubble& b, BlockResult r, const DiscretizationPtr& disc, const Frame& fr) {
  rotate(r.re, r.im, -b.sigma);
  LzResult out{ComplexField(disc, fr)};
  out.phi.re() = r.re;
  out.phi.im() = r.im;
  out.kernel_fraction = r.total_sq > 0.0 ? r.kernel_sq / r.total_sq : 0.0;
  out.kernel_dominated = out.kernel_fraction > 0.5;
  return out;
}

}  // namespace

LzResult apply_Lz(const BlockDiagonalHessian& h, const Bubble& b, const ComplexField& k) {
  check_frame(b, k);
  Eigen::MatrixXd re = k.re(), im = k.im();
  rotate(re, im, b.sigma);
  return finish_lz(b, block_apply(h, re, im, false, 1), k.disc(), k.frame());
}

LzResult apply_Lz(const BlockDiagonalHessian& h, const Bubble& b, const Load& k) {
  if (k.frame != b.frame()) throw InvalidArgument("apply_Lz: load frame differs from the bubble frame");
  Eigen::MatrixXd re = k.re, im = k.im;
  rotate(re, im, b.sigma);
  return finish_lz(b, block_apply(h, re, im, true, 1), k.disc, k.frame);
}

ComplexField project_off_kernel(const BlockDiagonalHessian& h, const Bubble& b, const ComplexField& v) {
  check_frame(b, v);
  const Discretization& d = h.disc();
  Eigen::MatrixXd re = v.re(), im = v.im();
  rotate(re, im, b.sigma);
  const double thr = h.kernel_threshold();
  for (int l = 0; l <= d.k_max(); ++l) {
    const auto& rows = d.modes_of_degree(l);
    const Eigen::MatrixXd& V = h.eigenvectors(l);
    for (int part = 0; part < 2; ++part) {
      Eigen::MatrixXd& M = part == 0 ? re : im;
      const Eigen::VectorXd& f = part == 0 ? h.real_factors(l) : h.imag_factors(l);
      Eigen::MatrixXd X = gather(M, rows);
      const Eigen::MatrixXd alpha = X * d.stiffness(l) * V;
      for (int k = 0; k < f.size(); ++k)
        if (std::abs(f[k]) < thr) X -= alpha.col(k) * V.col(k).transpose();
      scatter(M, rows, X);
    }
  }
  rotate(re, im, -b.sigma);
  ComplexField out(v.disc(), v.frame());
  out.re() = re;
  out.im() = im;
  return out;
}

KernelCount kernel_dimension_check(const BlockDiagonalHessian& h, const Bubble& b) {
  if (b.xi.size() != h.disc().dim().n()) throw DimensionMismatch("kernel_dimension_check: centre");
  const Discretization& d = h.disc();
  KernelCount c;
  for (int l = 0; l <= d.k_max(); ++l) {
    const int m = static_cast<int>(d.modes_of_degree(l).size());
    for (int k = 0; k < h.real_factors(l).size(); ++k) {
      if (std::abs(h.real_factors(l)[k]) < h.kernel_threshold()) c.real_kernel += m;
      if (std::abs(h.imag_factors(l)[k]) < h.kernel_threshold()) c.imag_kernel += m;
    }
  }
  return c;
}

}  // namespace critmag
