#include "critmag/field.hpp"

#include <cmath>

#include "critmag/errors.hpp"

namespace critmag {

namespace {

// Barycentric weights on the nodes, rescaled to unit maximum.
Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& t) {
  const int n = static_cast<int>(t.size());
  Eigen::VectorXd logw(n), sign(n);
  for (int j = 0; j < n; ++j) {
    double l = 0.0, s = 1.0;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      const double d = t[j] - t[k];
      l -= std::log(std::abs(d));
      if (d < 0) s = -s;
    }
    logw[j] = l;
    sign[j] = s;
  }
  const double m = logw.maxCoeff();
  Eigen::VectorXd w(n);
  for (int j = 0; j < n; ++j) w[j] = sign[j] * std::exp(logw[j] - m);
  return w;
}

// Lagrange values and derivatives at s (s not a node).
void lagrange(const Eigen::VectorXd& t, const Eigen::VectorXd& bw, double s, Eigen::VectorXd& l,
              Eigen::VectorXd& dl) {
  const int n = static_cast<int>(t.size());
  l.resize(n);
  dl.resize(n);
  double psi = 0.0, dpsi = 0.0;
  for (int k = 0; k < n; ++k) {
    const double q = bw[k] / (s - t[k]);
    psi += q;
    dpsi -= q / (s - t[k]);
  }
  for (int j = 0; j < n; ++j) {
    const double q = bw[j] / (s - t[j]);
    l[j] = q / psi;
    dl[j] = (-q / (s - t[j]) * psi - q * dpsi) / (psi * psi);
  }
}

Eigen::MatrixXd differentiation_matrix(const Eigen::VectorXd& t, const Eigen::VectorXd& bw) {
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (bw[j] / bw[i]) / (t[i] - t[j]);
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D;
}

}  // namespace

std::shared_ptr<const Discretization> Discretization::create(const Dimension& dim,
                                                             const DiscretizationParams& params) {
  return std::shared_ptr<const Discretization>(new Discretization(dim, params));
}

Discretization::Discretization(const Dimension& dim, const DiscretizationParams& params)
    : dim_(dim), params_(params), radial_(params.radial_nodes, params.map_scale) {
  if (params_.k_max < 1) throw InvalidArgument("Discretization: k_max must be at least 1");
  if (params_.angular_exactness == 0) params_.angular_exactness = 2 * params_.k_max + 6;
  if (params_.angular_exactness < 2 * params_.k_max)
    throw InvalidArgument("Discretization: angular exactness must be at least 2*k_max");
  if (params_.slab < 1) params_.slab = 1;
  const int N = dim.n();
  const int n = radial_.size();
  const double L = radial_.map_scale();
  sphere_ = std::make_shared<const SphereRule>(N - 1, params_.angular_exactness);
  angular_ = std::make_shared<const AngularBasis>(N - 1, params_.k_max, sphere_);
  measure_ = radial_.measure_weights(N);

  by_degree_.assign(params_.k_max + 1, {});
  for (int a = 0; a < angular_->size(); ++a) by_degree_[angular_->degree(a)].push_back(a);

  const Eigen::VectorXd& tn = radial_.t();
  bary_ = barycentric_weights(tn);
  const int p = N - 3;

  // Nodal derivative matrix in r.
  const Eigen::MatrixXd Dt = differentiation_matrix(tn, bary_);
  dr_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const double si = 1.0 - tn[i];
    for (int j = 0; j < n; ++j) {
      const double sj = 1.0 - tn[j];
      const double g = std::pow(si / sj, p);
      double v = g * Dt(i, j);
      if (i == j) v += -p * std::pow(si, p - 1) / std::pow(sj, p);
      dr_(i, j) = v * si * si / L;
    }
  }

  // Stiffness matrices with an oversampled Gauss rule in t (exact for integer N).
  const GaussRule over = gauss_legendre(n + N + 10, 0.0, 1.0);
  const int M = static_cast<int>(over.nodes.size());
  Eigen::MatrixXd Bv(M, n), Bd(M, n);
  Eigen::VectorXd wk(M), wm(M);
  for (int k = 0; k < M; ++k) {
    const double s = over.nodes[k];
    const double om = 1.0 - s;
    Eigen::VectorXd l, dl;
    lagrange(tn, bary_, s, l, dl);
    for (int j = 0; j < n; ++j) {
      const double sj = 1.0 - tn[j];
      const double g = std::pow(om / sj, p);
      const double dg = -p * std::pow(om, p - 1) / std::pow(sj, p);
      Bv(k, j) = g * l[j];
      Bd(k, j) = (dg * l[j] + g * dl[j]) * om * om / L;  // d/dr
    }
    const double r = L * s / om;
    const double jac = std::pow(r, N - 1) * L / (om * om);
    wk[k] = over.weights[k] * jac;
    wm[k] = over.weights[k] * jac / (r * r);
  }
  const Eigen::MatrixXd Kd = Bd.transpose() * wk.asDiagonal() * Bd;
  const Eigen::MatrixXd Km = Bv.transpose() * wm.asDiagonal() * Bv;
  stiffness_.resize(params_.k_max + 1);
  stiffness_llt_.resize(params_.k_max + 1);
  for (int l = 0; l <= params_.k_max; ++l) {
    Eigen::MatrixXd K = Kd + double(l) * (l + N - 2) * Km;
    K = 0.5 * (K + K.transpose());
    stiffness_[l] = K;
    stiffness_llt_[l].compute(K);
    if (stiffness_llt_[l].info() != Eigen::Success)
      throw Error("Discretization: stiffness matrix is not positive definite");
  }
}

void Discretization::radial_basis(double r, Eigen::VectorXd& b, Eigen::VectorXd* db) const {
  const int n = n_radial();
  const double L = radial_.map_scale();
  const double s = r / (L + r);
  const double om = 1.0 - s;
  const int p = dim_.n() - 3;
  const Eigen::VectorXd& tn = radial_.t();
  Eigen::VectorXd l(n), dl(n);
  int hit = -1;
  for (int j = 0; j < n; ++j)
    if (std::abs(s - tn[j]) < 1e-15) hit = j;
  if (hit >= 0) {
    l.setZero();
    l[hit] = 1.0;
    const Eigen::MatrixXd D = differentiation_matrix(tn, bary_);
    dl = D.row(hit).transpose();
  } else {
    lagrange(tn, bary_, s, l, dl);
  }
  b.resize(n);
  if (db) db->resize(n);
  for (int j = 0; j < n; ++j) {
    const double sj = 1.0 - tn[j];
    const double g = std::pow(om / sj, p);
    b[j] = g * l[j];
    if (db) {
      const double dg = -p * std::pow(om, p - 1) / std::pow(sj, p);
      (*db)[j] = (dg * l[j] + g * dl[j]) * om * om / L;
    }
  }
}

// ---------------------------------------------------------------- Load

Load::Load(DiscretizationPtr d, Frame f)
    : disc(std::move(d)),
      frame(std::move(f)),
      re(Eigen::MatrixXd::Zero(disc->n_modes(), disc->n_radial())),
      im(Eigen::MatrixXd::Zero(disc->n_modes(), disc->n_radial())) {}

double Load::operator()(const ComplexField& v) const {
  if (v.disc() != disc || v.frame() != frame)
    throw InvalidArgument("Load: field has a different discretization or frame");
  return re.cwiseProduct(v.re()).sum() + im.cwiseProduct(v.im()).sum();
}

Load& Load::operator+=(const Load& o) {
  if (o.disc != disc || o.frame != frame) throw InvalidArgument("Load: incompatible operands");
  re += o.re;
  im += o.im;
  return *this;
}

Load& Load::operator*=(double s) {
  re *= s;
  im *= s;
  return *this;
}

// ---------------------------------------------------------------- ComplexField

ComplexField::ComplexField(DiscretizationPtr disc, Frame frame)
    : disc_(std::move(disc)), frame_(std::move(frame)) {
  if (!disc_) throw InvalidArgument("ComplexField: null discretization");
  if (frame_.xi.size() == 0) frame_.xi = Eigen::VectorXd::Zero(disc_->dim().n());
  if (frame_.xi.size() != disc_->dim().n()) throw DimensionMismatch("ComplexField: frame centre");
  if (!(frame_.mu > 0.0)) throw InvalidArgument("ComplexField: frame scale must be positive");
  re_ = Eigen::MatrixXd::Zero(disc_->n_modes(), disc_->n_radial());
  im_ = re_;
}

ComplexField ComplexField::sample(DiscretizationPtr disc, Frame frame,
                                  const std::function<std::complex<double>(const Eigen::VectorXd&)>& f) {
  ComplexField u(disc, std::move(frame));
  const int np = disc->n_points(), nr = disc->n_radial();
  Eigen::MatrixXd v(np, 2 * nr);
  for (int q = 0; q < nr; ++q)
    for (int p = 0; p < np; ++p) {
      const std::complex<double> z = f(grid_point(*disc, p, q));
      v(p, q) = z.real();
      v(p, nr + q) = z.imag();
    }
  const Eigen::MatrixXd c = disc->angular().analysis(v);
  u.re_ = c.leftCols(nr);
  u.im_ = c.rightCols(nr);
  return u;
}

ComplexField ComplexField::radial(DiscretizationPtr disc, Frame frame,
                                  const std::function<std::complex<double>(double)>& f) {
  ComplexField u(disc, std::move(frame));
  const int a0 = disc->angular().constant_mode();
  const double s = std::sqrt(disc->dim().sphere_area());
  for (int q = 0; q < disc->n_radial(); ++q) {
    const std::complex<double> z = f(disc->radial().nodes()[q]);
    u.re_(a0, q) = s * z.real();
    u.im_(a0, q) = s * z.imag();
  }
  return u;
}

std::complex<double> ComplexField::evaluate_local(const Eigen::VectorXd& y) const {
  if (y.size() != dim().n()) throw DimensionMismatch("ComplexField::evaluate: wrong length");
  const double r = y.norm();
  Eigen::VectorXd b;
  disc_->radial_basis(r, b);
  if (r == 0.0) {
    const int a0 = disc_->angular().constant_mode();
    const double y0 = 1.0 / std::sqrt(dim().sphere_area());
    return {y0 * re_.row(a0).dot(b), y0 * im_.row(a0).dot(b)};
  }
  const Eigen::VectorXd Y = disc_->angular().evaluate(y / r);
  return {Y.dot(re_ * b), Y.dot(im_ * b)};
}

Eigen::VectorXcd ComplexField::gradient_local(const Eigen::VectorXd& y) const {
  if (y.size() != dim().n()) throw DimensionMismatch("ComplexField::gradient: wrong length");
  double r = y.norm();
  Eigen::VectorXd w;
  if (r < 1e-12) {
    // The gradient is continuous; evaluate just off the origin.
    w = Eigen::VectorXd::Zero(dim().n());
    w[0] = 1.0;
    r = 1e-9;
  } else {
    w = y / r;
  }
  Eigen::VectorXd b, db;
  disc_->radial_basis(r, b, &db);
  Eigen::VectorXd Y;
  Eigen::MatrixXd G;
  disc_->angular().evaluate_with_gradient(w, Y, G);
  const Eigen::VectorXd fr = re_ * b, fi = im_ * b, dfr = re_ * db, dfi = im_ * db;
  const Eigen::VectorXd gr = w * Y.dot(dfr) + G * fr / r;
  const Eigen::VectorXd gi = w * Y.dot(dfi) + G * fi / r;
  Eigen::VectorXcd g(dim().n());
  for (int k = 0; k < dim().n(); ++k) g[k] = {gr[k], gi[k]};
  return g;
}

std::complex<double> ComplexField::evaluate(const Eigen::VectorXd& x) const {
  const double N = dim().n();
  return std::pow(frame_.mu, -(N - 2.0) / 2.0) * evaluate_local((x - frame_.xi) / frame_.mu);
}

Eigen::VectorXcd ComplexField::gradient(const Eigen::VectorXd& x) const {
  const double N = dim().n();
  return std::pow(frame_.mu, -N / 2.0) * gradient_local((x - frame_.xi) / frame_.mu);
}

void ComplexField::check_compatible(const ComplexField& o) const {
  if (o.disc_ != disc_) throw InvalidArgument("ComplexField: different discretizations");
  if (o.frame_ != frame_) throw InvalidArgument("ComplexField: different frames");
}

double ComplexField::e_inner(const ComplexField& o) const {
  check_compatible(o);
  double s = 0.0;
  for (int l = 0; l <= disc_->k_max(); ++l) {
    const Eigen::MatrixXd& K = disc_->stiffness(l);
    for (int a : disc_->modes_of_degree(l)) {
      s += re_.row(a).dot(K * o.re_.row(a).transpose());
      s += im_.row(a).dot(K * o.im_.row(a).transpose());
    }
  }
  return s;
}

double ComplexField::degree_fraction_from(int lmin) const {
  double top = 0.0, all = 0.0;
  for (int l = 0; l <= disc_->k_max(); ++l) {
    const Eigen::MatrixXd& K = disc_->stiffness(l);
    double s = 0.0;
    for (int a : disc_->modes_of_degree(l)) {
      s += re_.row(a).dot(K * re_.row(a).transpose());
      s += im_.row(a).dot(K * im_.row(a).transpose());
    }
    all += s;
    if (l >= lmin) top += s;
  }
  return all > 0.0 ? top / all : 0.0;
}

ComplexField& ComplexField::operator+=(const ComplexField& o) {
  check_compatible(o);
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& o) {
  check_compatible(o);
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

ComplexField& ComplexField::operator*=(double s) {
  re_ *= s;
  im_ *= s;
  return *this;
}

ComplexField& ComplexField::operator*=(std::complex<double> s) {
  const Eigen::MatrixXd r = s.real() * re_ - s.imag() * im_;
  im_ = s.imag() * re_ + s.real() * im_;
  re_ = r;
  return *this;
}

ComplexField ComplexField::operator+(const ComplexField& o) const {
  ComplexField u = *this;
  u += o;
  return u;
}

ComplexField ComplexField::operator-(const ComplexField& o) const {
  ComplexField u = *this;
  u -= o;
  return u;
}

ComplexField ComplexField::operator*(double s) const {
  ComplexField u = *this;
  u *= s;
  return u;
}

ComplexField ComplexField::operator*(std::complex<double> s) const {
  ComplexField u = *this;
  u *= s;
  return u;
}

ComplexField riesz(const Load& load) {
  ComplexField y(load.disc, load.frame);
  const Discretization& d = *load.disc;
  for (int l = 0; l <= d.k_max(); ++l) {
    const auto& llt = d.stiffness_factor(l);
    for (int a : d.modes_of_degree(l)) {
      y.re().row(a) = llt.solve(load.re.row(a).transpose()).transpose();
      y.im().row(a) = llt.solve(load.im.row(a).transpose()).transpose();
    }
  }
  return y;
}

GridSlab sample_slab(const ComplexField& u, int q0, int q1, bool with_gradient) {
  const Discretization& d = *u.disc();
  const AngularBasis& ang = d.angular();
  const int nb = q1 - q0;
  GridSlab s;
  s.q0 = q0;
  s.q1 = q1;
  Eigen::MatrixXd c(d.n_modes(), 2 * nb);
  c.leftCols(nb) = u.re().middleCols(q0, nb);
  c.rightCols(nb) = u.im().middleCols(q0, nb);
  const Eigen::MatrixXd v = ang.synthesis(c);
  s.re = v.leftCols(nb);
  s.im = v.rightCols(nb);
  if (!with_gradient) return s;

  const int N = d.dim().n();
  const Eigen::MatrixXd& D = d.radial_derivative();
  Eigen::MatrixXd cr(d.n_modes(), 2 * nb);
  cr.leftCols(nb) = u.re() * D.middleRows(q0, nb).transpose();
  cr.rightCols(nb) = u.im() * D.middleRows(q0, nb).transpose();
  const Eigen::MatrixXd vr = ang.synthesis(cr);
  std::vector<Eigen::MatrixXd> dj(N);
  for (int j = 1; j <= N - 1; ++j) dj[j] = ang.synthesis_derivative(c, j);

  Eigen::VectorXd inv_r(2 * nb);
  for (int k = 0; k < nb; ++k) inv_r[k] = inv_r[nb + k] = 1.0 / d.radial().nodes()[q0 + k];
  const Eigen::MatrixXd& pts = d.sphere().points();
  s.grad_re.resize(N);
  s.grad_im.resize(N);
  for (int k = 0; k < N; ++k) {
    Eigen::MatrixXd tang = Eigen::MatrixXd::Zero(d.n_points(), 2 * nb);
    for (int j = 1; j <= N - 1; ++j) tang += ang.tangent_dual(j).row(k).transpose().asDiagonal() * dj[j];
    const Eigen::MatrixXd g = pts.row(k).transpose().asDiagonal() * vr + tang * inv_r.asDiagonal();
    s.grad_re[k] = g.leftCols(nb);
    s.grad_im[k] = g.rightCols(nb);
  }
  return s;
}

void accumulate_load(Load& load, const Eigen::MatrixXd& g_re, const Eigen::MatrixXd& g_im, int q0) {
  const Discretization& d = *load.disc;
  const int nb = static_cast<int>(g_re.cols());
  Eigen::MatrixXd v(d.n_points(), 2 * nb);
  v.leftCols(nb) = g_re;
  v.rightCols(nb) = g_im;
  const Eigen::MatrixXd c = d.angular().analysis(v);
  const Eigen::VectorXd w = d.radial_measure().segment(q0, nb);
  load.re.middleCols(q0, nb) += c.leftCols(nb) * w.asDiagonal();
  load.im.middleCols(q0, nb) += c.rightCols(nb) * w.asDiagonal();
}

}  // namespace critmag
