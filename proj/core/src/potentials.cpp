#include "critmag/potentials.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "critmag/errors.hpp"

namespace critmag {

// ---------------------------------------------------------------- RBF tables

RbfInterpolant::RbfInterpolant(const PotentialTable& table) {
  const long n = table.points.cols();
  const long d = table.points.rows();
  if (n < d + 2) throw InvalidArgument("user-table: need at least N + 2 samples");
  if (table.values.cols() != n) throw InvalidArgument("user-table: value count differs from point count");
  points_ = table.points;
  radius_ = table.points.colwise().norm().maxCoeff();

  const long m = n + d + 1;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) M(i, j) = std::pow((points_.col(i) - points_.col(j)).norm(), 3);
    M(i, n) = M(n, i) = 1.0;
    for (long k = 0; k < d; ++k) M(i, n + 1 + k) = M(n + 1 + k, i) = points_(k, i);
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, table.values.rows());
  rhs.topRows(n) = table.values.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (lu.rank() < m) throw InvalidArgument("user-table: degenerate sample set");
  const Eigen::MatrixXd sol = lu.solve(rhs);
  coeffs_ = sol.topRows(n);
  poly_ = sol.bottomRows(d + 1);
}

Eigen::VectorXd RbfInterpolant::operator()(const Eigen::VectorXd& x) const {
  if (x.norm() > radius_) return Eigen::VectorXd::Zero(coeffs_.cols());
  Eigen::VectorXd v = poly_.row(0).transpose();
  v += poly_.bottomRows(x.size()).transpose() * x;
  for (long i = 0; i < points_.cols(); ++i)
    v += std::pow((points_.col(i) - x).norm(), 3) * coeffs_.row(i).transpose();
  return v;
}

// ---------------------------------------------------------------- potentials

MagneticPotential::MagneticPotential(std::string family, int n, Field a, Scalar div, bool zero,
                                     Batch batch)
    : family_(std::move(family)),
      n_(n),
      a_(std::move(a)),
      div_(std::move(div)),
      zero_(zero),
      batch_(std::move(batch)) {}

void MagneticPotential::sample(const Eigen::MatrixXd& X, Eigen::MatrixXd& A, Eigen::VectorXd& div) const {
  A.resize(X.rows(), n_);
  div.resize(X.rows());
  if (zero_) {
    A.setZero();
    div.setZero();
  } else if (batch_) {
    batch_(X, A, div);
  } else {
    for (long i = 0; i < X.rows(); ++i) {
      const Eigen::VectorXd x = X.row(i).transpose();
      A.row(i) = a_(x).transpose();
      div[i] = div_(x);
    }
  }
}

MagneticPotential MagneticPotential::zero(const Dimension& dim) {
  const int n = dim.n();
  return MagneticPotential(
      "zero", n, [n](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(n).eval(); },
      [](const Eigen::VectorXd&) { return 0.0; }, true);
}

ElectricPotential::ElectricPotential(std::string family, Scalar v, bool zero, Batch batch)
    : family_(std::move(family)), v_(std::move(v)), zero_(zero), batch_(std::move(batch)) {}

void ElectricPotential::sample(const Eigen::MatrixXd& X, Eigen::VectorXd& v) const {
  v.resize(X.rows());
  if (zero_) {
    v.setZero();
  } else if (batch_) {
    batch_(X, v);
  } else {
    for (long i = 0; i < X.rows(); ++i) v[i] = v_(X.row(i).transpose());
  }
}

ElectricPotential ElectricPotential::zero() {
  return ElectricPotential("zero", [](const Eigen::VectorXd&) { return 0.0; }, true);
}

namespace {

Eigen::VectorXd vector_or(const Eigen::VectorXd& v, int n, int unit_axis, const char* what) {
  if (v.size() == 0) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    if (unit_axis >= 0) e[unit_axis] = 1.0;
    return e;
  }
  if (v.size() != n) {
    std::ostringstream os;
    os << what << ": expected " << n << " components, got " << v.size();
    throw DimensionMismatch(os.str());
  }
  return v;
}

// Rows of X minus c.
Eigen::MatrixXd shifted(const Eigen::MatrixXd& X, const Eigen::VectorXd& c) {
  Eigen::MatrixXd Y(X.rows(), X.cols());
  for (long k = 0; k < X.cols(); ++k) Y.col(k) = X.col(k).array() - c[k];
  return Y;
}

// A = (a + b J y) e row by row.
void envelope(Eigen::MatrixXd& A, const Eigen::MatrixXd& Y, const Eigen::VectorXd& a, double b,
              const Eigen::ArrayXd& e) {
  A.resize(Y.rows(), Y.cols());
  for (long k = 0; k < Y.cols(); ++k) A.col(k) = (a[k] * e).matrix();
  if (b != 0.0) {
    A.col(0).array() -= b * Y.col(1).array() * e;
    A.col(1).array() += b * Y.col(0).array() * e;
  }
}

// J(x) rotates the (x_1, x_2) plane.
inline void add_swirl(Eigen::VectorXd& a, const Eigen::VectorXd& y, double b) {
  a[0] -= b * y[1];
  a[1] += b * y[0];
}

MagneticPotential make_magnetic(const MagneticSpec& s, const Dimension& dim) {
  const int n = dim.n();
  const Eigen::VectorXd a = vector_or(s.amplitude, n, 0, "potential.A.amplitude");
  const Eigen::VectorXd c = vector_or(s.center, n, -1, "potential.A.center");
  const double b = s.swirl;
  const bool zero = a.isZero(0.0) && b == 0.0;
  if (s.family == "gaussian-envelope") {
    if (!(s.lambda > 0.0)) throw InvalidArgument("gaussian-envelope: lambda must be positive");
    const double lam = s.lambda;
    return MagneticPotential(
        s.family, n,
        [a, c, b, lam](const Eigen::VectorXd& x) {
          const Eigen::VectorXd y = x - c;
          Eigen::VectorXd v = a;
          add_swirl(v, y, b);
          return (v * std::exp(-lam * y.squaredNorm())).eval();
        },
        [a, c, lam](const Eigen::VectorXd& x) {
          const Eigen::VectorXd y = x - c;
          return -2.0 * lam * a.dot(y) * std::exp(-lam * y.squaredNorm());
        },
        zero,
        [a, c, b, lam](const Eigen::MatrixXd& X, Eigen::MatrixXd& A, Eigen::VectorXd& div) {
          const Eigen::MatrixXd Y = shifted(X, c);
          const Eigen::ArrayXd e = (-lam * Y.rowwise().squaredNorm().array()).exp();
          envelope(A, Y, a, b, e);
          div = (-2.0 * lam * (Y * a).array() * e).matrix();
        });
  }
  if (s.family == "algebraic-decay") {
    if (s.power < 0.0) throw InvalidArgument("algebraic-decay: power must be non-negative");
    if (b != 0.0 && s.power < 1.0)
      throw InvalidArgument("algebraic-decay: swirl needs power >= 1 to stay bounded");
    const double p = s.power;
    return MagneticPotential(
        s.family, n,
        [a, c, b, p](const Eigen::VectorXd& x) {
          const Eigen::VectorXd y = x - c;
          Eigen::VectorXd v = a;
          add_swirl(v, y, b);
          return (v * std::pow(1.0 + y.squaredNorm(), -0.5 * p)).eval();
        },
        [a, c, p](const Eigen::VectorXd& x) {
          const Eigen::VectorXd y = x - c;
          return -p * a.dot(y) * std::pow(1.0 + y.squaredNorm(), -0.5 * p - 1.0);
        },
        zero,
        [a, c, b, p](const Eigen::MatrixXd& X, Eigen::MatrixXd& A, Eigen::VectorXd& div) {
          const Eigen::MatrixXd Y = shifted(X, c);
          const Eigen::ArrayXd q = 1.0 + Y.rowwise().squaredNorm().array();
          const Eigen::ArrayXd e = q.pow(-0.5 * p);
          envelope(A, Y, a, b, e);
          div = (-p * (Y * a).array() * e / q).matrix();
        });
  }
  if (s.family == "user-table") {
    if (s.table.points.cols() == 0) throw InvalidArgument("user-table: potential.A.table is empty");
    if (s.divergence_table.points.cols() == 0)
      throw InvalidArgument("user-table: magnetic potential requires an explicit divergence table");
    if (s.table.points.rows() != n || s.table.values.rows() != n ||
        s.divergence_table.points.rows() != n || s.divergence_table.values.rows() != 1)
      throw DimensionMismatch("user-table: table shape does not match the dimension");
    auto A = std::make_shared<RbfInterpolant>(s.table);
    auto D = std::make_shared<RbfInterpolant>(s.divergence_table);
    const bool tz = s.table.values.isZero(0.0);
    return MagneticPotential(
        s.family, n, [A](const Eigen::VectorXd& x) { return (*A)(x); },
        [D](const Eigen::VectorXd& x) { return (*D)(x)[0]; }, tz);
  }
  throw InvalidArgument("unknown magnetic potential family '" + s.family + "'");
}

ElectricPotential make_electric(const ElectricSpec& s, const Dimension& dim) {
  const int n = dim.n();
  const Eigen::VectorXd c = vector_or(s.center, n, -1, "potential.V.center");
  const double v0 = s.amplitude;
  const bool zero = v0 == 0.0;
  if (s.family == "gaussian" || s.family == "sign-changing-gaussian") {
    if (!(s.lambda > 0.0)) throw InvalidArgument(s.family + ": lambda must be positive");
    const double lam = s.lambda;
    if (s.family == "gaussian")
      return ElectricPotential(
          s.family,
          [c, v0, lam](const Eigen::VectorXd& x) { return v0 * std::exp(-lam * (x - c).squaredNorm()); },
          zero, [c, v0, lam](const Eigen::MatrixXd& X, Eigen::VectorXd& v) {
            v = (v0 * (-lam * shifted(X, c).rowwise().squaredNorm().array()).exp()).matrix();
          });
    const Eigen::VectorXd d = vector_or(s.direction, n, 0, "potential.V.direction");
    return ElectricPotential(
        s.family,
        [c, d, v0, lam](const Eigen::VectorXd& x) {
          const Eigen::VectorXd y = x - c;
          return v0 * d.dot(y) * std::exp(-lam * y.squaredNorm());
        },
        zero || d.isZero(0.0), [c, d, v0, lam](const Eigen::MatrixXd& X, Eigen::VectorXd& v) {
          const Eigen::MatrixXd Y = shifted(X, c);
          v = (v0 * (Y * d).array() * (-lam * Y.rowwise().squaredNorm().array()).exp()).matrix();
        });
  }
  if (s.family == "algebraic-decay") {
    if (s.power < 0.0) throw InvalidArgument("algebraic-decay: power must be non-negative");
    const double p = s.power;
    return ElectricPotential(
        s.family,
        [c, v0, p](const Eigen::VectorXd& x) {
          return v0 * std::pow(1.0 + (x - c).squaredNorm(), -0.5 * p);
        },
        zero, [c, v0, p](const Eigen::MatrixXd& X, Eigen::VectorXd& v) {
          v = (v0 * (1.0 + shifted(X, c).rowwise().squaredNorm().array()).pow(-0.5 * p)).matrix();
        });
  }
  if (s.family == "user-table") {
    if (s.table.points.cols() == 0) throw InvalidArgument("user-table: potential.V.table is empty");
    if (s.table.points.rows() != n || s.table.values.rows() != 1)
      throw DimensionMismatch("user-table: table shape does not match the dimension");
    auto V = std::make_shared<RbfInterpolant>(s.table);
    return ElectricPotential(
        s.family, [V](const Eigen::VectorXd& x) { return (*V)(x)[0]; }, s.table.values.isZero(0.0));
  }
  throw InvalidArgument("unknown electric potential family '" + s.family + "'");
}

}  // namespace

PotentialPair make_potential(const PotentialConfig& config, const Dimension& dim) {
  const double N = dim.n();
  const double r = config.r_exponent == 0.0 ? N / 2.0 : config.r_exponent;
  const double s = config.s_exponent == 0.0 ? N / 4.0 : config.s_exponent;
  if (!(r > 1.0 && r < N)) throw InvalidArgument("potential.r_exponent must lie in (1, N)");
  if (!(s > 1.0 && s < N / 2.0)) throw InvalidArgument("potential.s_exponent must lie in (1, N/2)");
  return {make_magnetic(config.A, dim), make_electric(config.V, dim), r, s};
}

// ---------------------------------------------------------------- assumption checks

bool AssumptionReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return !entries.empty();
}

namespace {

std::vector<Eigen::VectorXd> unit_directions(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd w(n);
    for (int k = 0; k < n; ++k) w[k] = g(rng);
    out.push_back(w.normalized());
  }
  return out;
}

}  // namespace

LpEstimate lp_norm_estimate(const std::function<double(const Eigen::VectorXd&)>& f, double p,
                            const Dimension& dim, const IntegrationScheme& scheme) {
  LpEstimate out;
  const int n = dim.n();
  const auto dirs = unit_directions(n, 64, scheme.seed ^ 0x5eedULL);
  // T(R) = max_w |f(R w)|^p R^N
  auto tail = [&](double R) {
    double t = 0.0;
    for (const auto& w : dirs) t = std::max(t, std::pow(std::abs(f(R * w)), p) * std::pow(R, n));
    return t;
  };
  const double t_mid = tail(std::ldexp(1.0, 8)), t_far = tail(std::ldexp(1.0, 16));
  if (!std::isfinite(t_mid) || !std::isfinite(t_far)) {
    out.norm = std::numeric_limits<double>::infinity();
    out.detail = "non-finite values in the tail";
    return out;
  }
  if (t_far > 0.0 && t_far > 0.9 * t_mid) {
    out.norm = std::numeric_limits<double>::infinity();
    std::ostringstream os;
    os << "|f|^p R^N does not decay: " << t_mid << " at R=2^8, " << t_far << " at R=2^16";
    out.detail = os.str();
    return out;
  }
  out.finite = true;
  try {
    const auto res = integrate_rn(
        [&](const Eigen::VectorXd& x) { return std::complex<double>(std::pow(std::abs(f(x)), p)); },
        dim, scheme);
    out.norm = std::pow(std::max(res.value.real(), 0.0), 1.0 / p);
  } catch (const ToleranceNotMet& e) {
    out.norm = std::pow(std::max(e.estimate, 0.0), 1.0 / p);
    out.detail = "quadrature tolerance not met; estimate is approximate";
  }
  return out;
}

double divergence_mismatch(const MagneticPotential& A, const Dimension& dim, std::uint64_t seed,
                           int samples, double step) {
  const int n = dim.n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(n);
    for (int k = 0; k < n; ++k) x[k] = g(rng);
    double fd = 0.0;
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp[k] += step;
      xm[k] -= step;
      fd += (A(xp)[k] - A(xm)[k]) / (2.0 * step);
    }
    const double an = A.divergence(x);
    worst = std::max(worst, std::abs(an - fd) / std::max(1.0, std::abs(an)));
  }
  return worst;
}

AssumptionReport check_assumptions(const PotentialPair& pot, const Dimension& dim,
                                   const IntegrationScheme& scheme) {
  scheme.validate();
  AssumptionReport rep;
  const double N = dim.n();

  // Sup over a random cloud for the L^infinity parts.
  auto sup_of = [&](const std::function<double(const Eigen::VectorXd&)>& f) {
    std::mt19937_64 rng(scheme.seed ^ 0xc10dULL);
    std::normal_distribution<double> g;
    double m = 0.0;
    for (int i = 0; i < 4096; ++i) {
      Eigen::VectorXd x(dim.n());
      for (int k = 0; k < dim.n(); ++k) x[k] = g(rng) * (1.0 + (i % 4) * 3.0);
      m = std::max(m, std::abs(f(x)));
    }
    return m;
  };

  {
    AssumptionEntry e{"A1", 0.0, false, pot.r_exponent, ""};
    auto absA = [&](const Eigen::VectorXd& x) { return pot.A(x).norm(); };
    const double sup = sup_of(absA);
    const auto est = lp_norm_estimate(absA, pot.r_exponent, dim, scheme);
    e.estimate = est.norm;
    e.pass = est.finite && std::isfinite(sup);
    std::ostringstream os;
    os << "sup|A| ~ " << sup;
    if (!est.detail.empty()) os << "; " << est.detail;
    e.detail = os.str();
    rep.entries.push_back(e);
  }
  {
    AssumptionEntry e{"A2", 0.0, false, N / 2.0, ""};
    const double mism = divergence_mismatch(pot.A, dim, scheme.seed);
    const auto est = lp_norm_estimate([&](const Eigen::VectorXd& x) { return pot.A.divergence(x); },
                                      N / 2.0, dim, scheme);
    e.estimate = est.norm;
    e.pass = est.finite && mism <= 1e-6;
    std::ostringstream os;
    os << "divergence cross-check mismatch " << mism;
    if (mism > 1e-6) os << " exceeds 1e-6";
    if (!est.detail.empty()) os << "; " << est.detail;
    e.detail = os.str();
    rep.entries.push_back(e);
  }
  {
    AssumptionEntry e{"V", 0.0, false, pot.s_exponent, ""};
    auto absV = [&](const Eigen::VectorXd& x) { return pot.V(x); };
    const double sup = sup_of(absV);
    const auto est = lp_norm_estimate(absV, pot.s_exponent, dim, scheme);
    e.estimate = est.norm;
    e.pass = est.finite && std::isfinite(sup);
    std::ostringstream os;
    os << "sup|V| ~ " << sup;
    if (!est.detail.empty()) os << "; " << est.detail;
    e.detail = os.str();
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace critmag
