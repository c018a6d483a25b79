#include "critmag/melnikov.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "critmag/errors.hpp"

namespace critmag {

Melnikov::Melnikov(PotentialPair pot, DiscretizationPtr disc, HessianPtr hess)
    : pot_(std::move(pot)), disc_(std::move(disc)), hess_(std::move(hess)) {
  if (!disc_) throw InvalidArgument("Melnikov: missing discretization");
  if (pot_.A.n() != disc_->dim().n()) throw DimensionMismatch("Melnikov: potential dimension");
  if (!hess_) hess_ = build_hessian_blocks(disc_);
}

LzResult Melnikov::correction_solve(const Bubble& b) const {
  return apply_Lz(*hess_, b, grad_G1_load(b, pot_.A, disc_));
}

ComplexField Melnikov::correction_field(const Bubble& b) const {
  LzResult r = correction_solve(b);
  r.phi *= -1.0;
  return r.phi;
}

namespace {

Eigen::ArrayXd omega_dot(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A) {
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(A.rows());
  for (long k = 0; k < A.cols(); ++k) s += P.row(k).transpose().array() * A.col(k).array();
  return s;
}

void check_point(double mu, const Eigen::VectorXd& xi, int n) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("gamma: mu must be positive");
  if (xi.size() != n) throw DimensionMismatch("gamma: centre has the wrong dimension");
}

}  // namespace

GammaSample Melnikov::gamma(double mu, const Eigen::VectorXd& xi, double sigma) const {
  const int N = dim().n();
  check_point(mu, xi, N);
  std::vector<double> key;
  if (sigma == 0.0) {
    key.push_back(mu);
    key.insert(key.end(), xi.data(), xi.data() + xi.size());
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }

  const Discretization& d = *disc_;
  const Bubble b(sigma, mu, xi);
  const Frame fr = b.frame();
  const bool magnetic = !pot_.A.is_zero();
  const bool electric = !pot_.V.is_zero();
  const double cs = std::cos(sigma), sn = std::sin(sigma);
  const int slab = std::max(1, d.params().slab);
  const int nr = d.n_radial();

  GammaSample out;
  out.mu = mu;
  out.xi = xi;
  Load load(disc_, fr);
  FramePotentials fp;
  double g2_abs = 0.0, g2_tail = 0.0;
  for (int q0 = 0; q0 < nr; q0 += slab) {
    const int q1 = std::min(nr, q0 + slab);
    Eigen::MatrixXd gre, gim;
    if (magnetic) {
      gre.resize(d.n_points(), q1 - q0);
      gim.resize(d.n_points(), q1 - q0);
    }
    for (int q = q0; q < q1; ++q) {
      if (!magnetic && !electric) break;
      const double r = d.radial().nodes()[q];
      const double z = unit_bubble(r, dim()), zr = unit_bubble_dr(r, dim());
      sample_frame_potentials(d, fr, q, magnetic ? &pot_.A : nullptr, electric ? &pot_.V : nullptr, fp);
      const Eigen::ArrayXd& w = d.sphere().weights().array();
      const double wz = 0.5 * d.radial_measure()[q] * z * z;
      double piece = 0.0, piece_abs = 0.0;
      if (magnetic) {
        const double m = wz * (w * fp.A.rowwise().squaredNorm().array()).sum();
        out.g2_magnetic += m;
        piece += m;
        piece_abs += std::abs(m);
        // load density e^{i sigma} i (2 z_0' omega . A~ + z_0 div A~)
        const Eigen::ArrayXd s = 2.0 * zr * omega_dot(d.sphere().points(), fp.A) + z * fp.div.array();
        gre.col(q - q0) = (-sn * s).matrix();
        gim.col(q - q0) = (cs * s).matrix();
      }
      if (electric) {
        const double e = wz * (w * fp.V.array()).sum();
        out.g2_electric += e;
        piece += e;
        piece_abs += wz * (w * fp.V.array().abs()).sum();
      }
      g2_abs += piece_abs;
      if (q >= nr - 4) g2_tail += piece_abs;
    }
    if (magnetic) accumulate_load(load, gre, gim, q0);
  }
  out.g2_part = out.g2_magnetic + out.g2_electric;

  double trunc = 0.0;
  if (magnetic) {
    const LzResult res = apply_Lz(*hess_, b, load);
    // phi = -L_z G1'(z); correction = 1/2 <G1'(z), phi>
    out.correction_part = -0.5 * load(res.phi);
    const ComplexField G = riesz(load);
    out.correction_alt = -0.5 * G.e_inner(res.phi);
    out.phi_norm = res.phi.e_norm();
    out.kernel_fraction = res.kernel_fraction;
    trunc = std::abs(out.correction_part) * G.degree_fraction_from(std::max(0, d.k_max() - 1));
  }
  out.gamma = out.g2_part + out.correction_part;
  out.quadrature_error = std::abs(out.correction_part - out.correction_alt) + trunc +
                         (g2_abs > 0.0 ? std::abs(out.g2_part) * g2_tail / g2_abs : 0.0);

  if (sigma == 0.0) {
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, out);
  }
  return out;
}

double Melnikov::gamma_alpha(double mu, const Eigen::VectorXd& xi, double alpha) const {
  if (!(alpha >= 1.0 && alpha < 2.0))
    throw InvalidArgument("gamma_alpha: alpha must lie in [1, 2); use gamma for alpha = 2");
  check_point(mu, xi, dim().n());
  if (pot_.V.is_zero()) return 0.0;
  const Discretization& d = *disc_;
  const Frame fr{mu, xi};
  FramePotentials fp;
  double acc = 0.0;
  for (int q = 0; q < d.n_radial(); ++q) {
    const double z = unit_bubble(d.radial().nodes()[q], dim());
    sample_frame_potentials(d, fr, q, nullptr, &pot_.V, fp);
    acc += 0.5 * d.radial_measure()[q] * z * z * (d.sphere().weights().array() * fp.V.array()).sum();
  }
  return acc;
}

std::size_t Melnikov::cache_size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.size();
}

double gamma_smallmu_closed_form(const Eigen::VectorXd& xi, const PotentialPair& pot, const Dimension& dim) {
  if (xi.size() != dim.n()) throw DimensionMismatch("gamma_smallmu_closed_form: centre dimension");
  return 0.5 * pot.V(xi) * bubble_norms(dim).l2;
}

RichardsonResult richardson_limit(const std::function<double(double)>& g, const std::vector<double>& mu) {
  if (mu.size() != 3) throw InvalidArgument("richardson_limit: needs three scales h, h/2, h/4");
  for (int k = 0; k < 2; ++k)
    if (std::abs(mu[k + 1] * 2.0 - mu[k]) > 1e-12 * mu[k])
      throw InvalidArgument("richardson_limit: scales must halve");
  RichardsonResult r;
  r.mu = mu;
  for (double m : mu) r.values.push_back(g(m));
  r.first_level_coarse = 2.0 * r.values[1] - r.values[0];
  r.first_level_fine = 2.0 * r.values[2] - r.values[1];
  r.limit = (4.0 * r.first_level_fine - r.first_level_coarse) / 3.0;
  return r;
}

// ---------------------------------------------------------------- decay

DecayReport boundary_decay_check(const Melnikov& m, const DecayOptions& opt) {
  const int N = m.dim().n();
  const Eigen::VectorXd xi0 = opt.xi0.size() ? opt.xi0 : Eigen::VectorXd::Zero(N);
  Eigen::VectorXd dir = opt.direction.size() ? opt.direction : Eigen::VectorXd::Unit(N, 0);
  if (xi0.size() != N || dir.size() != N) throw DimensionMismatch("boundary_decay_check: vector dimension");
  dir.normalize();
  DecayReport rep;

  std::vector<double> small, scaled;
  for (double mu : opt.small_mu) {
    const GammaSample s = m.gamma(mu, xi0);
    rep.rows.push_back({"mu->0", mu, xi0, std::abs(s.gamma), std::abs(s.gamma) / (mu * mu)});
    small.push_back(std::abs(s.gamma));
    scaled.push_back(std::abs(s.gamma) / (mu * mu));
  }
  rep.small_mu_pass = !small.empty();
  for (std::size_t k = 1; k < small.size(); ++k)
    if (!(small[k] <= small[k - 1]) || scaled[k] > 2.0 * scaled[0] + 1e-300) rep.small_mu_pass = false;

  std::vector<double> far;
  for (double t : opt.far_xi) {
    const Eigen::VectorXd xi = xi0 + t * dir;
    const GammaSample s = m.gamma(1.0, xi);
    rep.rows.push_back({"|xi|->inf", 1.0, xi, std::abs(s.gamma), 0.0});
    far.push_back(std::abs(s.gamma));
  }
  rep.far_xi_pass = !far.empty();
  for (std::size_t k = 1; k < far.size(); ++k)
    if (!(far[k] <= far[k - 1])) rep.far_xi_pass = false;

  std::vector<double> large;
  for (double mu : opt.large_mu) {
    const GammaSample s = m.gamma(mu, xi0);
    rep.rows.push_back({"mu->inf", mu, xi0, std::abs(s.g2_magnetic), 0.0});
    large.push_back(std::abs(s.g2_magnetic));
  }
  rep.large_mu_pass = !large.empty();
  for (std::size_t k = 1; k < large.size(); ++k)
    if (!(large[k] <= large[k - 1])) rep.large_mu_pass = false;

  for (double mu : opt.interior_mu)
    for (double t : opt.interior_t)
      rep.interior_max = std::max(rep.interior_max, std::abs(m.gamma(mu, xi0 + t * dir).gamma));
  rep.boundary_value = std::abs(m.gamma(opt.boundary_mu, xi0 + opt.boundary_xi * dir).gamma);
  rep.boundary_pass = rep.boundary_value <= opt.boundary_ratio * rep.interior_max;
  return rep;
}

// ---------------------------------------------------------------- landscape

std::vector<double> ScanBox::mu_values() const {
  std::vector<double> v(mu_count);
  for (int i = 0; i < mu_count; ++i)
    v[i] = mu_count == 1 ? mu_min : mu_min * std::pow(mu_max / mu_min, double(i) / (mu_count - 1));
  return v;
}

std::vector<double> ScanBox::t_values() const {
  std::vector<double> v(t_count);
  for (int i = 0; i < t_count; ++i)
    v[i] = t_count == 1 ? t_min : t_min + (t_max - t_min) * double(i) / (t_count - 1);
  return v;
}

Eigen::VectorXd ScanBox::xi_at(const Eigen::VectorXd& t, int n) const {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  if (directions.empty()) {
    xi[0] = t[0];
    return xi;
  }
  for (std::size_t k = 0; k < directions.size(); ++k) xi += t[k] * directions[k];
  return xi;
}

void ScanBox::validate(int n) const {
  if (!(mu_min > 0.0) || !(mu_max > mu_min)) throw InvalidArgument("scan: need 0 < mu_min < mu_max");
  if (mu_count < 1 || t_count < 1) throw InvalidArgument("scan: resolutions must be positive");
  if (!(t_max >= t_min)) throw InvalidArgument("scan: need t_min <= t_max");
  if (directions.size() > 2) throw InvalidArgument("scan: the slice has at most two directions");
  for (const auto& d : directions) {
    if (d.size() != n) throw DimensionMismatch("scan: slice direction has the wrong dimension");
    if (d.norm() == 0.0) throw InvalidArgument("scan: slice direction is zero");
  }
}

int GammaLandscape::xi_count() const {
  return box.slice_dim() == 1 ? box.t_count : box.t_count * box.t_count;
}

int GammaLandscape::index(int i, int j) const { return i * xi_count() + j; }

GammaLandscape scan_landscape(const Melnikov& m, const ScanBox& box) {
  const int n = m.dim().n();
  box.validate(n);
  GammaLandscape L;
  L.box = box;
  L.n = n;
  const auto mus = box.mu_values();
  const auto ts = box.t_values();
  const int sd = box.slice_dim();
  const int nx = L.xi_count();
  const int total = static_cast<int>(mus.size()) * nx;
  L.rows.resize(total);

#pragma omp parallel for schedule(dynamic)
  for (int idx = 0; idx < total; ++idx) {
    const int i = idx / nx, j = idx % nx;
    Eigen::VectorXd t(sd);
    if (sd == 1) {
      t[0] = ts[j];
    } else {
      t[0] = ts[j / box.t_count];
      t[1] = ts[j % box.t_count];
    }
    LandscapeRow& row = L.rows[idx];
    row.t = t;
    const Eigen::VectorXd xi = box.xi_at(t, n);
    try {
      row.sample = m.gamma(mus[i], xi);
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.ok = false;
      row.error = e.what();
      row.sample.mu = mus[i];
      row.sample.xi = xi;
      row.sample.gamma = row.sample.g2_part = row.sample.correction_part = row.sample.quadrature_error = nan;
    }
  }
  return L;
}

}  // namespace critmag
