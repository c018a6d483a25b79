#include "critmag/harmonics.hpp"

#include <cmath>
#include <numbers>

#include "critmag/errors.hpp"

namespace critmag {

namespace {

double gegenbauer(int n, double lambda, double s) {
  if (n == 0) return 1.0;
  double c0 = 1.0, c1 = 2.0 * lambda * s;
  for (int k = 2; k <= n; ++k) {
    const double c2 = (2.0 * s * (k + lambda - 1.0) * c1 - (k + 2.0 * lambda - 2.0) * c0) / k;
    c0 = c1;
    c1 = c2;
  }
  return c1;
}

double gegenbauer_derivative(int n, double lambda, double s) {
  if (n == 0) return 0.0;
  return 2.0 * lambda * gegenbauer(n - 1, lambda + 1.0, s);
}

// 1 / sqrt(h_n^lambda)
double gegenbauer_normaliser(int n, double lambda) {
  const double logh = std::log(std::numbers::pi) + (1.0 - 2.0 * lambda) * std::log(2.0) +
                      std::lgamma(n + 2.0 * lambda) - std::lgamma(n + 1.0) -
                      std::log(n + lambda) - 2.0 * std::lgamma(lambda);
  return std::exp(-0.5 * logh);
}

// m index order 0, 1, -1, 2, -2, ...
int m_of_index(int i) { return (i == 0) ? 0 : ((i % 2 == 1) ? (i + 1) / 2 : -(i / 2)); }

// Columns j = 1..d: d omega / d theta_j, with squared norms.
void tangent_vectors(int d, const Eigen::VectorXd& ang, Eigen::MatrixXd& t,
                     Eigen::VectorXd& norm2) {
  Eigen::VectorXd sn(d + 1), cs(d + 1);
  for (int j = 1; j <= d; ++j) {
    sn[j] = std::sin(ang[j]);
    cs[j] = std::cos(ang[j]);
  }
  // P[k] = prod_{i >= k} sin(theta_i), i >= 2
  Eigen::VectorXd P = Eigen::VectorXd::Ones(d + 2);
  for (int k = d; k >= 2; --k) P[k] = P[k + 1] * sn[k];
  t.setZero(d + 1, d + 1);
  norm2.setZero(d + 1);
  for (int j = 1; j <= d; ++j) {
    if (j == 1) {
      const double p2 = (d >= 2) ? P[2] : 1.0;
      t(0, 1) = -p2 * sn[1];
      t(1, 1) = p2 * cs[1];
      norm2[1] = p2 * p2;
      continue;
    }
    // components below level j carry sin(theta_j); differentiate it to cos(theta_j)
    double p2 = 1.0;
    for (int i = 2; i <= d; ++i) p2 *= (i == j) ? cs[i] : sn[i];
    t(0, j) = p2 * cs[1];
    t(1, j) = p2 * sn[1];
    for (int k = 2; k < j; ++k) {
      double pk = cs[k];
      for (int i = k + 1; i <= d; ++i) pk *= (i == j) ? cs[i] : sn[i];
      t(k, j) = pk;
    }
    t(j, j) = -P[j + 1] * sn[j];
    norm2[j] = P[j + 1] * P[j + 1];
  }
}

}  // namespace

double polar_factor(int j, int l, int lp, double theta) {
  const double lambda = lp + 0.5 * (j - 1);
  const int n = l - lp;
  const double s = std::sin(theta);
  return gegenbauer_normaliser(n, lambda) * std::pow(s, lp) * gegenbauer(n, lambda, std::cos(theta));
}

double polar_factor_derivative(int j, int l, int lp, double theta) {
  const double lambda = lp + 0.5 * (j - 1);
  const int n = l - lp;
  const double s = std::sin(theta), c = std::cos(theta);
  double v = -std::pow(s, lp + 1) * gegenbauer_derivative(n, lambda, c);
  if (lp > 0) v += lp * std::pow(s, lp - 1) * c * gegenbauer(n, lambda, c);
  return gegenbauer_normaliser(n, lambda) * v;
}

double azimuth_factor(int m, double phi) {
  if (m == 0) return 1.0 / std::sqrt(2.0 * std::numbers::pi);
  if (m > 0) return std::cos(m * phi) / std::sqrt(std::numbers::pi);
  return std::sin(-m * phi) / std::sqrt(std::numbers::pi);
}

double azimuth_factor_derivative(int m, double phi) {
  if (m == 0) return 0.0;
  if (m > 0) return -m * std::sin(m * phi) / std::sqrt(std::numbers::pi);
  return -m * std::cos(-m * phi) / std::sqrt(std::numbers::pi);
}

long AngularBasis::count_of_degree(int d, int l) {
  auto binom = [](long n, long k) -> long {
    if (k < 0 || n < k) return 0;
    long r = 1;
    for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  return binom(l + d, d) - binom(l + d - 2, d);
}

AngularBasis::AngularBasis(int d, int max_degree, std::shared_ptr<const SphereRule> rule)
    : d_(d), L_(max_degree), rule_(std::move(rule)) {
  if (!rule_ || rule_->dim() != d) throw DimensionMismatch("AngularBasis: rule dimension mismatch");
  if (max_degree < 0) throw InvalidArgument("AngularBasis: negative degree");
  if (rule_->exactness() < 2 * max_degree)
    throw InvalidArgument("AngularBasis: rule exactness must be at least twice the degree");

  // Level structures.
  levels_.resize(d + 1);
  {
    Level& l1 = levels_[1];
    for (int i = 0; i < 2 * L_ + 1; ++i) {
      l1.degree.push_back(std::abs(m_of_index(i)));
      l1.parent.push_back(-1);
    }
  }
  for (int j = 2; j <= d; ++j) {
    const Level& prev = levels_[j - 1];
    Level& cur = levels_[j];
    const int np = static_cast<int>(prev.degree.size());
    cur.first_child.resize(np);
    cur.child_count.resize(np);
    for (int p = 0; p < np; ++p) {
      cur.first_child[p] = static_cast<int>(cur.degree.size());
      cur.child_count[p] = L_ - prev.degree[p] + 1;
      for (int l = prev.degree[p]; l <= L_; ++l) {
        cur.degree.push_back(l);
        cur.parent.push_back(p);
      }
    }
  }
  const Level& top = levels_[d];
  const int nm = static_cast<int>(top.degree.size());
  chains_.assign(nm, std::vector<int>(d + 1, 0));
  for (int a = 0; a < nm; ++a) {
    int idx = a;
    for (int j = d; j >= 2; --j) {
      chains_[a][j] = levels_[j].degree[idx];
      idx = levels_[j].parent[idx];
    }
    chains_[a][1] = m_of_index(idx);
    if (d == 1) chains_[a][1] = m_of_index(a);
    bool zero = true;
    for (int j = 1; j <= d; ++j) zero = zero && chains_[a][j] == 0;
    if (zero) constant_mode_ = a;
  }

  // Tables on the rule nodes.
  const int nphi = rule_->n_phi();
  phi_tab_.resize(2 * L_ + 1, nphi);
  phi_dtab_.resize(2 * L_ + 1, nphi);
  for (int i = 0; i < 2 * L_ + 1; ++i)
    for (int k = 0; k < nphi; ++k) {
      phi_tab_(i, k) = azimuth_factor(m_of_index(i), rule_->phi()[k]);
      phi_dtab_(i, k) = azimuth_factor_derivative(m_of_index(i), rule_->phi()[k]);
    }
  phi_tab_w_ = phi_tab_ * rule_->phi_weight();

  pol_tab_.resize(d + 1);
  pol_tab_w_.resize(d + 1);
  pol_dtab_.resize(d + 1);
  for (int j = 2; j <= d; ++j) {
    const GaussRule& g = rule_->polar(j);
    const int n = static_cast<int>(g.nodes.size());
    pol_tab_[j].resize(L_ + 1);
    pol_tab_w_[j].resize(L_ + 1);
    pol_dtab_[j].resize(L_ + 1);
    for (int lp = 0; lp <= L_; ++lp) {
      Eigen::MatrixXd t(L_ - lp + 1, n), dt(L_ - lp + 1, n);
      for (int l = lp; l <= L_; ++l)
        for (int i = 0; i < n; ++i) {
          const double th = std::acos(g.nodes[i]);
          t(l - lp, i) = polar_factor(j, l, lp, th);
          dt(l - lp, i) = polar_factor_derivative(j, l, lp, th);
        }
      pol_tab_[j][lp] = t;
      pol_dtab_[j][lp] = dt;
      pol_tab_w_[j][lp] = t * g.weights.asDiagonal();
    }
  }

  // Tangent duals t_j / |t_j|^2 at every rule point.
  const int np = rule_->size();
  tangent_dual_.assign(d + 1, Eigen::MatrixXd::Zero(d + 1, np));
  for (int p = 0; p < np; ++p) {
    const Eigen::VectorXd ang = rule_->angles(p);
    Eigen::MatrixXd t;
    Eigen::VectorXd norm2;
    tangent_vectors(d, ang, t, norm2);
    for (int j = 1; j <= d; ++j) tangent_dual_[j].col(p) = t.col(j) / norm2[j];
  }
}

Eigen::MatrixXd AngularBasis::analysis(const Eigen::MatrixXd& values) const {
  const int np = rule_->size();
  if (values.rows() != np) throw DimensionMismatch("AngularBasis::analysis: wrong row count");
  const long ncol = values.cols();
  const int nphi = rule_->n_phi();
  long O = np / nphi;
  Eigen::Map<const Eigen::MatrixXd> F(values.data(), nphi, O * ncol);
  RowMat T = phi_tab_w_ * F;
  const int n = rule_->n_polar();
  for (int j = 2; j <= d_; ++j) {
    const Level& lev = levels_[j];
    const long On = O / n;
    RowMat Tn(static_cast<long>(lev.degree.size()), On * ncol);
    const int nparent = static_cast<int>(lev.first_child.size());
    for (int p = 0; p < nparent; ++p) {
      const int lp = levels_[j - 1].degree[p];
      Eigen::Map<const Eigen::MatrixXd> P(T.row(p).data(), n, On * ncol);
      Eigen::Map<RowMat> out(Tn.row(lev.first_child[p]).data(), lev.child_count[p], On * ncol);
      out.noalias() = pol_tab_w_[j][lp] * P;
    }
    T.swap(Tn);
    O = On;
  }
  return Eigen::MatrixXd(T);
}

Eigen::MatrixXd AngularBasis::synthesize(const Eigen::MatrixXd& coeffs, int deriv_level) const {
  if (coeffs.rows() != size()) throw DimensionMismatch("AngularBasis::synthesis: wrong row count");
  const long ncol = coeffs.cols();
  RowMat T = coeffs;
  const int n = rule_->n_polar();
  long O = 1;
  for (int j = d_; j >= 2; --j) {
    const Level& lev = levels_[j];
    const Level& prev = levels_[j - 1];
    const long Op = O * n;
    RowMat Tp(static_cast<long>(prev.degree.size()), Op * ncol);
    for (int p = 0; p < static_cast<int>(prev.degree.size()); ++p) {
      const int lp = prev.degree[p];
      const Eigen::MatrixXd& tab = (deriv_level == j) ? pol_dtab_[j][lp] : pol_tab_[j][lp];
      Eigen::Map<const RowMat> in(T.row(lev.first_child[p]).data(), lev.child_count[p], O * ncol);
      Eigen::Map<Eigen::MatrixXd> out(Tp.row(p).data(), n, O * ncol);
      out.noalias() = tab.transpose() * in;
    }
    T.swap(Tp);
    O = Op;
  }
  const int nphi = rule_->n_phi();
  Eigen::MatrixXd values(rule_->size(), ncol);
  Eigen::Map<Eigen::MatrixXd> F(values.data(), nphi, O * ncol);
  const Eigen::MatrixXd& tab = (deriv_level == 1) ? phi_dtab_ : phi_tab_;
  F.noalias() = tab.transpose() * T;
  return values;
}

Eigen::MatrixXd AngularBasis::synthesis(const Eigen::MatrixXd& coeffs) const {
  return synthesize(coeffs, 0);
}

Eigen::MatrixXd AngularBasis::synthesis_derivative(const Eigen::MatrixXd& coeffs, int j) const {
  if (j < 1 || j > d_) throw InvalidArgument("synthesis_derivative: level out of range");
  return synthesize(coeffs, j);
}

void AngularBasis::angles_of(const Eigen::VectorXd& omega, Eigen::VectorXd& ang) const {
  ang = Eigen::VectorXd::Zero(d_ + 1);
  Eigen::VectorXd w = omega / omega.norm();
  for (int j = d_; j >= 2; --j) {
    const double c = std::clamp(w[j], -1.0, 1.0);
    ang[j] = std::acos(c);
    const double s = std::sin(ang[j]);
    if (s < 1e-300) return;
    w.head(j) /= s;
  }
  ang[1] = std::atan2(w[1], w[0]);
}

Eigen::VectorXd AngularBasis::evaluate(const Eigen::VectorXd& omega) const {
  if (omega.size() != d_ + 1) throw DimensionMismatch("AngularBasis::evaluate: wrong length");
  Eigen::VectorXd ang;
  angles_of(omega, ang);
  const Level& l1 = levels_[1];
  Eigen::VectorXd val(static_cast<long>(l1.degree.size()));
  for (long i = 0; i < val.size(); ++i) val[i] = azimuth_factor(m_of_index(static_cast<int>(i)), ang[1]);
  for (int j = 2; j <= d_; ++j) {
    const Level& lev = levels_[j];
    Eigen::VectorXd nv(static_cast<long>(lev.degree.size()));
    for (long s = 0; s < nv.size(); ++s) {
      const int p = lev.parent[s];
      nv[s] = val[p] * polar_factor(j, lev.degree[s], levels_[j - 1].degree[p], ang[j]);
    }
    val.swap(nv);
  }
  return val;
}

void AngularBasis::evaluate_with_gradient(const Eigen::VectorXd& omega, Eigen::VectorXd& values,
                                          Eigen::MatrixXd& gradients) const {
  if (omega.size() != d_ + 1) throw DimensionMismatch("AngularBasis::evaluate: wrong length");
  Eigen::VectorXd ang;
  angles_of(omega, ang);

  // der[k] holds d/dtheta_k of the partial products.
  const Level& l1 = levels_[1];
  const int n1 = static_cast<int>(l1.degree.size());
  Eigen::VectorXd val(n1);
  std::vector<Eigen::VectorXd> der(d_ + 1);
  der[1].resize(n1);
  for (int i = 0; i < n1; ++i) {
    val[i] = azimuth_factor(m_of_index(i), ang[1]);
    der[1][i] = azimuth_factor_derivative(m_of_index(i), ang[1]);
  }
  for (int j = 2; j <= d_; ++j) {
    const Level& lev = levels_[j];
    const int ns = static_cast<int>(lev.degree.size());
    Eigen::VectorXd nv(ns);
    std::vector<Eigen::VectorXd> nd(d_ + 1);
    for (int k = 1; k <= j; ++k) nd[k].resize(ns);
    for (int s = 0; s < ns; ++s) {
      const int p = lev.parent[s];
      const int lp = levels_[j - 1].degree[p];
      const double f = polar_factor(j, lev.degree[s], lp, ang[j]);
      const double df = polar_factor_derivative(j, lev.degree[s], lp, ang[j]);
      nv[s] = val[p] * f;
      for (int k = 1; k < j; ++k) nd[k][s] = der[k][p] * f;
      nd[j][s] = val[p] * df;
    }
    val.swap(nv);
    der.swap(nd);
  }
  values = val;

  bool regular = true;
  for (int j = 2; j <= d_; ++j) regular = regular && std::abs(std::sin(ang[j])) > 1e-7;
  gradients.setZero(d_ + 1, size());
  if (!regular) {
    // Coordinate singularity: differentiate along an orthonormal tangent frame.
    Eigen::VectorXd w = omega / omega.norm();
    Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(d_ + 1, d_ + 1);
    basis.col(0) = w;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    Eigen::MatrixXd Q = qr.householderQ();
    const double h = 1e-6;
    for (int k = 1; k <= d_; ++k) {
      const Eigen::VectorXd e = Q.col(k);
      const Eigen::VectorXd vp = evaluate((w + h * e).normalized());
      const Eigen::VectorXd vm = evaluate((w - h * e).normalized());
      gradients += e * ((vp - vm) / (2.0 * h)).transpose();
    }
    return;
  }
  Eigen::MatrixXd t;
  Eigen::VectorXd norm2;
  tangent_vectors(d_, ang, t, norm2);
  for (int j = 1; j <= d_; ++j) gradients += (t.col(j) / norm2[j]) * der[j].transpose();
}

}  // namespace critmag
