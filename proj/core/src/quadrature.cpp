#include "critmag/quadrature.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "critmag/errors.hpp"

namespace critmag {

namespace {

// Three-term recurrence of the monic Jacobi polynomials: diagonal a_k and
// off-diagonal b_k (k >= 1), plus the total mass of the weight.
void jacobi_recurrence(int n, double a, double b, Eigen::VectorXd& diag, Eigen::VectorXd& off,
                       double& mass) {
  diag.resize(n);
  off.resize(std::max(n - 1, 0));
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    if (k == 0) {
      diag[0] = (b - a) / (ab + 2.0);
    } else {
      const double s = 2.0 * k + ab;
      diag[k] = (b * b - a * a) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    double v;
    if (k == 1) {
      v = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      const double s = 2.0 * k + ab;
      v = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    off[k - 1] = std::sqrt(v);
  }
  mass = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                  std::lgamma(ab + 2.0));
}

}  // namespace

GaussRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw InvalidArgument("gauss_jacobi: need n >= 1");
  if (alpha <= -1.0 || beta <= -1.0) throw InvalidArgument("gauss_jacobi: need alpha, beta > -1");
  Eigen::VectorXd diag, off;
  double mass;
  jacobi_recurrence(n, alpha, beta, diag, off, mass);

  GaussRule rule;
  if (n == 1) {
    rule.nodes = Eigen::VectorXd::Constant(1, diag[0]);
    rule.weights = Eigen::VectorXd::Constant(1, mass);
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  Eigen::VectorXd x = es.eigenvalues();

  // Newton polish on the orthonormal p_n, then Christoffel weights.
  Eigen::VectorXd w(n);
  const double p0 = 1.0 / std::sqrt(mass);
  for (int i = 0; i < n; ++i) {
    for (int it = 0; it < 3; ++it) {
      double pm = 0.0, p = p0, dpm = 0.0, dp = 0.0;
      for (int k = 0; k < n; ++k) {
        const double bk = (k == 0) ? 0.0 : off[k - 1];
        const double bk1 = (k + 1 < n) ? off[k] : 1.0;
        const double pn = ((x[i] - diag[k]) * p - bk * pm) / bk1;
        const double dpn = (p + (x[i] - diag[k]) * dp - bk * dpm) / bk1;
        pm = p;
        p = pn;
        dpm = dp;
        dp = dpn;
      }
      if (dp != 0.0) x[i] -= p / dp;
    }
    double s = 0.0, pm = 0.0, p = p0;
    for (int k = 0; k < n; ++k) {
      s += p * p;
      if (k + 1 < n) {
        const double bk = (k == 0) ? 0.0 : off[k - 1];
        const double pn = ((x[i] - diag[k]) * p - bk * pm) / off[k];
        pm = p;
        p = pn;
      }
    }
    w[i] = 1.0 / s;
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return x[a] < x[b]; });
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = x[idx[i]];
    rule.weights[i] = w[idx[i]];
  }
  return rule;
}

GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule r = gauss_jacobi(n, 0.0, 0.0);
  const double h = 0.5 * (b - a);
  r.nodes = (r.nodes.array() + 1.0) * h + a;
  r.weights *= h;
  return r;
}

RadialGrid::RadialGrid(int count, double map_scale) : scale_(map_scale) {
  if (count < 16) throw InvalidArgument("RadialGrid: need at least 16 nodes");
  if (!(map_scale > 0.0)) throw InvalidArgument("RadialGrid: map_scale must be positive");
  const GaussRule g = gauss_legendre(count, 0.0, 1.0);
  t_ = g.nodes;
  wt_ = g.weights;
  r_.resize(count);
  w_.resize(count);
  for (int i = 0; i < count; ++i) {
    const double s = 1.0 - t_[i];
    r_[i] = scale_ * t_[i] / s;
    w_[i] = wt_[i] * scale_ / (s * s);
  }
}

Eigen::VectorXd RadialGrid::measure_weights(int n) const {
  Eigen::VectorXd m(size());
  for (int i = 0; i < size(); ++i) m[i] = w_[i] * std::pow(r_[i], n - 1);
  return m;
}

SphereRule::SphereRule(int d, int exactness) : d_(d), exactness_(exactness) {
  if (d < 1) throw InvalidArgument("SphereRule: need d >= 1");
  if (exactness < 0) throw InvalidArgument("SphereRule: exactness must be non-negative");
  const int nphi = exactness + 1;
  phi_.resize(nphi);
  for (int i = 0; i < nphi; ++i) phi_[i] = 2.0 * std::numbers::pi * i / nphi;
  phi_weight_ = 2.0 * std::numbers::pi / nphi;
  polar_.resize(d + 1);
  n_polar_ = (d >= 2) ? exactness / 2 + 1 : 1;
  for (int j = 2; j <= d; ++j) {
    const double a = 0.5 * (j - 2);
    polar_[j] = gauss_jacobi(n_polar_, a, a);
  }

  long total = nphi;
  for (int j = 2; j <= d; ++j) total *= n_polar_;
  points_.resize(d + 1, total);
  weights_.resize(total);
  std::vector<int> idx(d + 1, 0);
  for (long p = 0; p < total; ++p) {
    long rem = p;
    idx[1] = static_cast<int>(rem % nphi);
    rem /= nphi;
    for (int j = 2; j <= d; ++j) {
      idx[j] = static_cast<int>(rem % n_polar_);
      rem /= n_polar_;
    }
    double w = phi_weight_;
    double prod = 1.0;  // product of sin(theta_k) for k > current level
    for (int j = d; j >= 2; --j) {
      const double c = polar_[j].nodes[idx[j]];
      const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
      points_(j, p) = prod * c;
      prod *= s;
      w *= polar_[j].weights[idx[j]];
    }
    points_(0, p) = prod * std::cos(phi_[idx[1]]);
    points_(1, p) = prod * std::sin(phi_[idx[1]]);
    weights_[p] = w;
  }
}

Eigen::VectorXd SphereRule::angles(int p) const {
  Eigen::VectorXd a(d_ + 1);
  a[0] = 0.0;
  long rem = p;
  a[1] = phi_[rem % n_phi()];
  rem /= n_phi();
  for (int j = 2; j <= d_; ++j) {
    a[j] = std::acos(polar_[j].nodes[rem % n_polar_]);
    rem /= n_polar_;
  }
  return a;
}

void IntegrationScheme::validate() const {
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-2))
    throw InvalidArgument("IntegrationScheme: rel_tol must lie in [1e-12, 1e-2]");
  if (max_points < 1024) throw InvalidArgument("IntegrationScheme: max_points too small");
  if (!(map_scale > 0.0)) throw InvalidArgument("IntegrationScheme: map_scale must be positive");
}

IntegrationScheme IntegrationScheme::defaults_for(const Dimension& dim) {
  IntegrationScheme s;
  if (dim.n() >= 7) {
    s.mode = Mode::RandomizedQmc;
    s.rel_tol = 1e-3;
  }
  return s;
}

namespace {

struct RuleSum {
  std::complex<double> value;
  double abs_sum = 0.0;
  std::int64_t points = 0;
};

void check_finite(const std::complex<double>& v, const Eigen::VectorXd& x) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    std::ostringstream os;
    os << "integrand returned a non-finite value at x = (" << x.transpose() << ")";
    throw IntegrandFailure(os.str());
  }
}

RuleSum product_sum(const RnIntegrand& f, int n, int nr, int exactness, double scale) {
  const RadialGrid grid(nr, scale);
  const Eigen::VectorXd rw = grid.measure_weights(n);
  const SphereRule sphere(n - 1, exactness);
  RuleSum out;
  Eigen::VectorXd x(n);
  for (int q = 0; q < nr; ++q) {
    std::complex<double> acc = 0.0;
    double acc_abs = 0.0;
    for (int p = 0; p < sphere.size(); ++p) {
      x = grid.nodes()[q] * sphere.points().col(p);
      const std::complex<double> v = f(x);
      check_finite(v, x);
      acc += sphere.weights()[p] * v;
      acc_abs += sphere.weights()[p] * std::abs(v);
    }
    out.value += rw[q] * acc;
    out.abs_sum += rw[q] * acc_abs;
  }
  out.points = static_cast<std::int64_t>(nr) * sphere.size();
  return out;
}

long sphere_points(int d, int exactness) {
  long total = exactness + 1;
  for (int j = 2; j <= d; ++j) total *= exactness / 2 + 1;
  return total;
}

IntegrationResult integrate_product(const RnIntegrand& f, const Dimension& dim,
                                    const IntegrationScheme& s) {
  // Radial error: compare with the half-node rule. Angular error: compare with
  // the rule one refinement step (4 degrees) lower.
  const int n = dim.n();
  const int step = 4;
  int nr = 32, deg = 8;
  std::int64_t used = 0;
  std::map<std::pair<int, int>, RuleSum> cache;
  auto rule = [&](int r, int dg) -> const RuleSum& {
    auto it = cache.find({r, dg});
    if (it != cache.end()) return it->second;
    RuleSum v = product_sum(f, n, r, dg, s.map_scale);
    used += v.points;
    return cache.emplace(std::make_pair(r, dg), v).first->second;
  };
  double best_err = INFINITY;
  std::complex<double> best = 0.0;
  while (true) {
    const long need = static_cast<long>(nr) * sphere_points(n - 1, deg) +
                      static_cast<long>(nr / 2) * sphere_points(n - 1, deg) +
                      static_cast<long>(nr) * sphere_points(n - 1, deg - step);
    if (used + need > s.max_points) {
      std::ostringstream os;
      os << "integrate_rn: tolerance " << s.rel_tol << " not met; achieved error " << best_err;
      throw ToleranceNotMet(os.str(), best_err, best.real());
    }
    const RuleSum full = rule(nr, deg);
    const RuleSum half_r = rule(nr / 2, deg);
    const RuleSum low_a = rule(nr, deg - step);
    const double er = std::abs(full.value - half_r.value);
    const double ea = std::abs(full.value - low_a.value);
    const double err = er + ea;
    best = full.value;
    best_err = err;
    if (err <= s.rel_tol * std::abs(full.value) || err <= 1e-13 * full.abs_sum)
      return {full.value, err, used};
    if (er >= ea)
      nr *= 2;
    else
      deg += step;
  }
}

IntegrationResult integrate_qmc(const RnIntegrand& f, const Dimension& dim,
                                const IntegrationScheme& s) {
  const int n = dim.n();
  const int shifts = 16;
  const double area = dim.sphere_area();
  const boost::math::normal_distribution<double> normal;
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::VectorXd> shift(shifts, Eigen::VectorXd(n + 1));
  for (auto& v : shift)
    for (int k = 0; k <= n; ++k) v[k] = unif(rng);

  std::int64_t per_shift = 4096;
  std::int64_t used = 0;
  double err = INFINITY;
  double mean_abs = 0.0;
  std::complex<double> mean = 0.0;
  while (true) {
    if (used + per_shift * shifts > s.max_points) {
      std::ostringstream os;
      os << "integrate_rn (qmc): tolerance " << s.rel_tol << " not met; achieved error " << err;
      throw ToleranceNotMet(os.str(), err, mean.real());
    }
    boost::random::sobol gen(n + 1);
    std::vector<std::complex<double>> est(shifts, 0.0);
    double abs_total = 0.0;
    Eigen::VectorXd u(n + 1), x(n), g(n);
    for (std::int64_t i = 0; i < per_shift; ++i) {
      for (int k = 0; k <= n; ++k) u[k] = std::ldexp(static_cast<double>(gen()), -64);
      for (int m = 0; m < shifts; ++m) {
        Eigen::VectorXd v = u + shift[m];
        for (int k = 0; k <= n; ++k) {
          v[k] -= std::floor(v[k]);
          v[k] = std::clamp(v[k], 1e-15, 1.0 - 1e-15);
        }
        for (int k = 0; k < n; ++k) g[k] = boost::math::quantile(normal, v[k + 1]);
        const double t = v[0];
        const double r = s.map_scale * t / (1.0 - t);
        const double jac = area * std::pow(r, n - 1) * s.map_scale / ((1.0 - t) * (1.0 - t));
        x = r * g / g.norm();
        const std::complex<double> fx = f(x);
        check_finite(fx, x);
        est[m] += jac * fx;
        abs_total += jac * std::abs(fx);
      }
    }
    used += per_shift * shifts;
    mean = 0.0;
    for (auto& e : est) {
      e /= static_cast<double>(per_shift);
      mean += e;
    }
    mean /= static_cast<double>(shifts);
    double var = 0.0;
    for (const auto& e : est) var += std::norm(e - mean);
    var /= (shifts - 1);
    err = std::sqrt(var / shifts);
    mean_abs = abs_total / static_cast<double>(per_shift * shifts);
    if (err <= s.rel_tol * std::abs(mean) || err <= 1e-13 * mean_abs) return {mean, err, used};
    per_shift *= 2;
  }
}

}  // namespace

IntegrationResult integrate_rn(const RnIntegrand& f, const Dimension& dim,
                               const IntegrationScheme& scheme) {
  scheme.validate();
  if (scheme.mode == IntegrationScheme::Mode::ProductGauss) return integrate_product(f, dim, scheme);
  return integrate_qmc(f, dim, scheme);
}

std::complex<double> integrate_sphere(const SphereIntegrand& f, int d, const SphereRule& rule) {
  if (rule.dim() != d)
    throw DimensionMismatch("integrate_sphere: rule is on S^" + std::to_string(rule.dim()) +
                            ", requested S^" + std::to_string(d));
  std::complex<double> acc = 0.0;
  Eigen::VectorXd w;
  for (int p = 0; p < rule.size(); ++p) {
    w = rule.points().col(p);
    acc += rule.weights()[p] * f(w);
  }
  return acc;
}

IntegrationResult integrate_radial(const std::function<double(double)>& F, double rel_tol,
                                   double map_scale, int max_nodes) {
  auto sum = [&](int n) {
    const RadialGrid g(n, map_scale);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = F(g.nodes()[i]);
      if (!std::isfinite(v)) throw IntegrandFailure("integrate_radial: non-finite integrand");
      s += g.weights()[i] * v;
    }
    return s;
  };
  int n = 32;
  double prev = sum(n);
  std::int64_t used = n;
  while (2 * n <= max_nodes) {
    n *= 2;
    const double cur = sum(n);
    used += n;
    const double err = std::abs(cur - prev);
    if (err <= rel_tol * std::abs(cur)) return {cur, err, used};
    prev = cur;
  }
  throw ToleranceNotMet("integrate_radial: tolerance not met", INFINITY, prev);
}

}  // namespace critmag
