#include "critmag/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "critmag/errors.hpp"

namespace critmag {

const char* to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::Min:
      return "min";
    case CriticalKind::Max:
      return "max";
    default:
      return "saddle";
  }
}

namespace {

// Gamma in (log mu, t) coordinates.
struct SliceFunction {
  const Melnikov& m;
  const ScanBox& box;
  double operator()(const Eigen::VectorXd& p) const {
    Eigen::VectorXd t = p.tail(p.size() - 1);
    return m.gamma(std::exp(p[0]), box.xi_at(t, m.dim().n())).gamma;
  }
};

Eigen::VectorXd steps(int dim, const SearchOptions& opt) {
  Eigen::VectorXd h = Eigen::VectorXd::Constant(dim, opt.xi_step);
  h[0] = opt.log_mu_step;
  return h;
}

Eigen::VectorXd fd_gradient(const SliceFunction& f, const Eigen::VectorXd& p, const Eigen::VectorXd& h) {
  Eigen::VectorXd g(p.size());
  for (int k = 0; k < p.size(); ++k) {
    Eigen::VectorXd a = p, b = p;
    a[k] += h[k];
    b[k] -= h[k];
    g[k] = (f(a) - f(b)) / (2.0 * h[k]);
  }
  return g;
}

struct Bounds {
  Eigen::VectorXd lo, hi;
  bool inside(const Eigen::VectorXd& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

// Nelder-Mead on f; returns the best vertex.
Eigen::VectorXd simplex_search(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                               const Eigen::VectorXd& scale, int iterations) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> x(n + 1, x0);
  std::vector<double> fx(n + 1);
  for (int k = 0; k < n; ++k) x[k + 1][k] += scale[k];
  for (int k = 0; k <= n; ++k) fx[k] = f(x[k]);
  std::vector<int> order(n + 1);
  for (int it = 0; it < iterations; ++it) {
    for (int k = 0; k <= n; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int best = order[0], worst = order[n], second = order[n - 1];
    double diam = 0.0;
    for (int k = 1; k <= n; ++k)
      diam = std::max(diam, ((x[order[k]] - x[best]).array() / scale.array()).abs().maxCoeff());
    if (diam < 1e-5 || std::abs(fx[worst] - fx[best]) <= 1e-13 * (1.0 + std::abs(fx[best]))) break;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (int k = 0; k <= n; ++k)
      if (k != worst) c += x[k];
    c /= n;
    const Eigen::VectorXd xr = c + (c - x[worst]);
    const double fr = f(xr);
    if (fr < fx[best]) {
      const Eigen::VectorXd xe = c + 2.0 * (c - x[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        x[worst] = xe;
        fx[worst] = fe;
      } else {
        x[worst] = xr;
        fx[worst] = fr;
      }
    } else if (fr < fx[second]) {
      x[worst] = xr;
      fx[worst] = fr;
    } else {
      const bool outside = fr < fx[worst];
      const Eigen::VectorXd xc = outside ? Eigen::VectorXd(c + 0.5 * (xr - c)) : Eigen::VectorXd(c + 0.5 * (x[worst] - c));
      const double fc = f(xc);
      if (fc < std::min(fr, fx[worst])) {
        x[worst] = xc;
        fx[worst] = fc;
      } else {
        for (int k = 0; k <= n; ++k) {
          if (k == best) continue;
          x[k] = x[best] + 0.5 * (x[k] - x[best]);
          fx[k] = f(x[k]);
        }
      }
    }
  }
  int b = 0;
  for (int k = 1; k <= n; ++k)
    if (fx[k] < fx[b]) b = k;
  return x[b];
}

// BFGS with central-difference gradients and backtracking.
Eigen::VectorXd quasi_newton_polish(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                                    Eigen::VectorXd x, double gtol, int iterations) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  double fx = f(x);
  Eigen::VectorXd g = grad(x);
  bool scaled = false;
  for (int it = 0; it < iterations && g.norm() > gtol; ++it) {
    Eigen::VectorXd d = -Hinv * g;
    if (d.dot(g) >= 0.0) {
      Hinv.setIdentity();
      d = -g;
    }
    // Keep the first step within a fraction of a grid cell.
    const double dn = d.norm();
    if (dn > 0.25) d *= 0.25 / dn;
    double a = 1.0;
    Eigen::VectorXd xn;
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      xn = x + a * d;
      fn = f(xn);
      if (fn <= fx + 1e-4 * a * g.dot(d)) {
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd gn = grad(xn);
    const Eigen::VectorXd s = xn - x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (!scaled) {
        Hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = xn;
    fx = fn;
    g = gn;
  }
  return x;
}

}  // namespace

LocalDerivatives gamma_derivatives(const Melnikov& m, const ScanBox& box, const Eigen::VectorXd& p,
                                   const SearchOptions& opt) {
  const SliceFunction f{m, box};
  const int d = static_cast<int>(p.size());
  const Eigen::VectorXd h = steps(d, opt);
  LocalDerivatives out;
  out.gradient = fd_gradient(f, p, h);
  out.hessian.resize(d, d);
  const double f0 = f(p);
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd a = p, b = p;
    a[i] += h[i];
    b[i] -= h[i];
    out.hessian(i, i) = (f(a) - 2.0 * f0 + f(b)) / (h[i] * h[i]);
    for (int j = i + 1; j < d; ++j) {
      Eigen::VectorXd pp = p, pm = p, mp = p, mm = p;
      pp[i] += h[i], pp[j] += h[j];
      pm[i] += h[i], pm[j] -= h[j];
      mp[i] -= h[i], mp[j] += h[j];
      mm[i] -= h[i], mm[j] -= h[j];
      out.hessian(i, j) = out.hessian(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
    }
  }
  return out;
}

SearchResult find_critical_points(const Melnikov& m, const GammaLandscape& L, const SearchOptions& opt) {
  SearchResult res;
  const ScanBox& box = L.box;
  const int sd = box.slice_dim();
  const int dim = sd + 1;
  const auto mus = box.mu_values();
  const auto ts = box.t_values();
  const int nmu = box.mu_count, nt = box.t_count, nx = L.xi_count();

  // Grid coordinates and values.
  double gmax = 0.0, noise = 0.0;
  for (const auto& r : L.rows) {
    if (!r.ok) continue;
    gmax = std::max(gmax, std::abs(r.sample.gamma));
    noise = std::max(noise, r.sample.quadrature_error);
  }
  const double floor = std::max(1e-12, 10.0 * noise);
  if (!(gmax > floor)) {
    res.flat = true;
    std::ostringstream os;
    os << "flat landscape: max |Gamma| = " << gmax << " does not exceed the noise floor " << floor;
    res.diagnostic = os.str();
    return res;
  }

  Bounds bounds;
  bounds.lo.resize(dim);
  bounds.hi.resize(dim);
  const double dlog = nmu > 1 ? std::log(box.mu_max / box.mu_min) / (nmu - 1) : 1.0;
  const double dt = nt > 1 ? (box.t_max - box.t_min) / (nt - 1) : 1.0;
  bounds.lo[0] = std::log(box.mu_min) - 0.5 * dlog;
  bounds.hi[0] = std::log(box.mu_max) + 0.5 * dlog;
  for (int k = 1; k < dim; ++k) {
    bounds.lo[k] = box.t_min - 0.5 * dt;
    bounds.hi[k] = box.t_max + 0.5 * dt;
  }
  double diag2 = std::pow(std::log(box.mu_max / box.mu_min), 2);
  for (int k = 1; k < dim; ++k) diag2 += std::pow(box.t_max - box.t_min, 2);
  res.merge_radius = opt.merge_fraction * std::sqrt(diag2);
  const double gtol = opt.grad_tol > 0.0 ? opt.grad_tol : 1e-5 * gmax;

  // Slice index j -> per-direction indices.
  auto split = [&](int j) {
    std::vector<int> v(sd);
    if (sd == 1)
      v[0] = j;
    else
      v = {j / nt, j % nt};
    return v;
  };
  auto join = [&](const std::vector<int>& v) { return sd == 1 ? v[0] : v[0] * nt + v[1]; };

  struct Start {
    Eigen::VectorXd p;
    double value;
    bool maximum;
  };
  std::vector<Start> starts;
  for (int i = 1; i + 1 < nmu; ++i) {
    for (int j = 0; j < nx; ++j) {
      const auto v = split(j);
      bool interior = true;
      for (int k = 0; k < sd; ++k) interior = interior && v[k] > 0 && v[k] + 1 < nt;
      if (!interior) continue;
      const LandscapeRow& c = L.rows[L.index(i, j)];
      if (!c.ok) continue;
      bool is_max = true, is_min = true;
      // All neighbours in the (3^dim - 1) stencil.
      const int stencil = sd == 1 ? 9 : 27;
      for (int s = 0; s < stencil; ++s) {
        int di = s % 3 - 1, rest = s / 3;
        std::vector<int> w = v;
        for (int k = 0; k < sd; ++k) {
          w[k] += rest % 3 - 1;
          rest /= 3;
        }
        if (di == 0 && w == v) continue;
        const LandscapeRow& o = L.rows[L.index(i + di, join(w))];
        if (!o.ok) continue;
        if (o.sample.gamma >= c.sample.gamma) is_max = false;
        if (o.sample.gamma <= c.sample.gamma) is_min = false;
      }
      if (!(is_max || is_min) || std::abs(c.sample.gamma) <= floor) continue;
      Eigen::VectorXd p(dim);
      p[0] = std::log(mus[i]);
      p.tail(sd) = c.t;
      starts.push_back({p, c.sample.gamma, is_max});
    }
  }
  // Extrema of the mu_min row against the neighbours the grid has.
  for (int j = 0; j < nx && nmu > 1; ++j) {
    const LandscapeRow& c = L.rows[L.index(0, j)];
    if (!c.ok || std::abs(c.sample.gamma) <= floor) continue;
    const auto v = split(j);
    bool edge = false;
    for (int k = 0; k < sd; ++k) edge = edge || v[k] == 0 || v[k] + 1 == nt;
    if (edge) continue;
    bool is_max = true, is_min = true;
    const int stencil = sd == 1 ? 9 : 27;
    for (int s = 0; s < stencil; ++s) {
      int di = s % 3 - 1, rest = s / 3;
      std::vector<int> w = v;
      bool valid = di >= 0;
      for (int k = 0; k < sd; ++k) {
        w[k] += rest % 3 - 1;
        rest /= 3;
        valid = valid && w[k] >= 0 && w[k] < nt;
      }
      if (!valid || (di == 0 && w == v)) continue;
      const LandscapeRow& o = L.rows[L.index(di, join(w))];
      if (!o.ok) continue;
      if (o.sample.gamma >= c.sample.gamma) is_max = false;
      if (o.sample.gamma <= c.sample.gamma) is_min = false;
    }
    if (is_max || is_min) {
      std::ostringstream os;
      os << "grid " << (is_max ? "maximum" : "minimum") << " on the mu_min row at t = " << c.t.transpose()
         << " (Gamma = " << c.sample.gamma << "); critical points below mu = " << box.mu_min
         << " are not resolved";
      res.warnings.push_back(os.str());
    }
  }
  std::stable_sort(starts.begin(), starts.end(),
                   [](const Start& a, const Start& b) { return std::abs(a.value) > std::abs(b.value); });
  if (static_cast<int>(starts.size()) > opt.max_starts) starts.resize(opt.max_starts);
  if (starts.empty()) {
    res.diagnostic = "no interior local extremum on the grid; the extremum may sit on the box boundary";
    return res;
  }

  const SliceFunction f{m, box};
  const Eigen::VectorXd h = steps(dim, opt);
  Eigen::VectorXd cell(dim);
  cell[0] = 0.5 * dlog;
  for (int k = 1; k < dim; ++k) cell[k] = 0.5 * dt;

  std::vector<std::optional<CriticalPoint>> found(starts.size());
  std::vector<std::string> notes(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < static_cast<int>(starts.size()); ++s) {
    try {
      const double sign = starts[s].maximum ? -1.0 : 1.0;
      auto obj = [&](const Eigen::VectorXd& p) {
        if (!bounds.inside(p)) return std::numeric_limits<double>::max();
        return sign * f(p);
      };
      auto grad = [&](const Eigen::VectorXd& p) { return Eigen::VectorXd(sign * fd_gradient(f, p, h)); };
      Eigen::VectorXd p = simplex_search(obj, starts[s].p, cell, opt.simplex_iterations);
      p = quasi_newton_polish(obj, grad, p, 0.1 * gtol, opt.polish_iterations);
      if (!bounds.inside(p)) {
        notes[s] = "refinement left the box";
        continue;
      }
      const LocalDerivatives der = gamma_derivatives(m, box, p, opt);
      CriticalPoint cp;
      cp.mu = std::exp(p[0]);
      cp.t = p.tail(sd);
      cp.xi = box.xi_at(cp.t, m.dim().n());
      cp.value = f(p);
      cp.gradient_norm = der.gradient.norm();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(der.hessian);
      const Eigen::VectorXd ev = es.eigenvalues();
      if ((ev.array() < 0.0).all())
        cp.kind = CriticalKind::Max;
      else if ((ev.array() > 0.0).all())
        cp.kind = CriticalKind::Min;
      else
        cp.kind = CriticalKind::Saddle;
      if (cp.gradient_norm >= gtol) {
        std::ostringstream os;
        os << "gradient norm " << cp.gradient_norm << " above tolerance " << gtol;
        notes[s] = os.str();
        continue;
      }
      found[s] = cp;
    } catch (const std::exception& e) {
      notes[s] = e.what();
    }
  }

  // Deduplicate within the merge radius: keep the more extreme value, then the smaller mu.
  auto coords = [](const CriticalPoint& c) {
    Eigen::VectorXd p(c.t.size() + 1);
    p[0] = std::log(c.mu);
    p.tail(c.t.size()) = c.t;
    return p;
  };
  auto better = [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.kind == CriticalKind::Min ? a.value < b.value : a.value > b.value;
    return a.mu < b.mu;
  };
  std::vector<CriticalPoint> kept;
  for (const auto& c : found) {
    if (!c) continue;
    bool merged = false;
    for (auto& k : kept) {
      if (k.kind == c->kind && (coords(k) - coords(*c)).norm() <= res.merge_radius) {
        if (better(*c, k)) k = *c;
        merged = true;
        break;
      }
    }
    if (!merged) kept.push_back(*c);
  }
  for (auto& c : kept) {
    const Eigen::VectorXd p = coords(c);
    double r = std::min((p - bounds.lo).minCoeff(), (bounds.hi - p).minCoeff());
    for (const auto& o : kept)
      if (&o != &c) r = std::min(r, (coords(o) - p).norm());
    c.basin_radius = r;
  }
  std::sort(kept.begin(), kept.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.mu < b.mu;
  });
  res.points = std::move(kept);
  std::ostringstream os;
  for (std::size_t s = 0; s < notes.size(); ++s)
    if (!notes[s].empty()) os << (os.tellp() > 0 ? "; " : "") << "start " << s << ": " << notes[s];
  res.diagnostic = os.str();
  return res;
}

ReducedSolution assemble_solution(const Melnikov& m, const Bubble& b, double eps, double eps_max) {
  if (!(eps >= 0.0)) throw InvalidArgument("assemble_solution: eps must be non-negative");
  if (eps > eps_max) {
    std::ostringstream os;
    os << "assemble_solution: eps = " << eps << " exceeds eps_max = " << eps_max
       << "; the first-order correction is not credible there";
    throw InvalidArgument(os.str());
  }
  ComplexField phi = m.correction_field(b);
  ComplexField u = bubble_field(b, m.disc());
  if (eps != 0.0) u += phi * eps;
  ReducedSolution sol{eps, b, phi, u, energy(u, m.potentials(), eps), 0.0, 0.0};
  const ResidualSplit r = pde_residual(m, sol);
  sol.residual_perp = r.perp;
  sol.residual_tangent = r.tangent;
  return sol;
}

ResidualSplit pde_residual(const Melnikov& m, const ReducedSolution& sol) {
  const ComplexField R = energy_gradient(sol.u, m.potentials(), sol.eps);
  const ComplexField perp = project_off_kernel(*m.hessian(), sol.bubble, R);
  ResidualSplit out;
  out.perp = perp.e_norm();
  out.tangent = (R - perp).e_norm();
  out.total = R.e_norm();
  return out;
}

}  // namespace critmag
