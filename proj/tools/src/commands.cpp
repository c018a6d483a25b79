#include "critmag_cli/commands.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "critmag/errors.hpp"
#include "critmag/functionals.hpp"
#include "critmag/instanton.hpp"
#include "critmag/spectral.hpp"

namespace critmag::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using cd = std::complex<double>;

// ---------------------------------------------------------------- report

bool RunReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

json RunReport::to_json() const {
  json j;
  j["command"] = command;
  j["config"] = echo(config);
  json checks_json = json::array();
  for (const auto& c : checks) {
    json e;
    e["name"] = c.name;
    e["pass"] = c.pass;
    e["values"] = c.values;
    e["detail"] = c.detail;
    checks_json.push_back(std::move(e));
  }
  j["checks"] = std::move(checks_json);
  j["outputs"] = outputs;
  j["warnings"] = warnings;
  j["diagnostic"] = diagnostic;
  j["exit_code"] = exit_code;
  return j;
}

// ---------------------------------------------------------------- output helpers

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, p);
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string vec_text(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
  return s + ")";
}

void log(const CommandOptions& o, const std::string& line) {
  if (o.log) *o.log << line << '\n' << std::flush;
}

struct Session {
  Dimension dim;
  DiscretizationPtr disc;
  HessianPtr hess;
  std::unique_ptr<Melnikov> m;
};

PotentialPair make_pair(const RunConfig& c, const CommandOptions& o) {
  try {
    return make_potential(c.potential(o.base_dir), c.dim());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

Session open_session(const RunConfig& c, const CommandOptions& o) {
  Session s{c.dim(), nullptr, nullptr, nullptr};
  s.disc = Discretization::create(s.dim, c.discretization());
  s.hess = build_hessian_blocks(s.disc);
  s.m = std::make_unique<Melnikov>(make_pair(c, o), s.disc, s.hess);
  return s;
}

RunReport start(const std::string& command, const RunConfig& c) {
  validate(c);
  RunReport r;
  r.command = command;
  r.config = c;
  fs::create_directories(c.output);
  return r;
}

RunReport& finish(RunReport& r) {
  write_atomic((fs::path(r.config.output) / (r.command + "_report.json")).string(),
               r.to_json().dump(2) + "\n");
  return r;
}

void add_assumption_checks(RunReport& r, const AssumptionReport& a) {
  for (const auto& e : a.entries) {
    Check c;
    c.name = "assumption " + e.name;
    c.pass = e.pass;
    c.values["exponent"] = e.exponent;
    c.values["estimate"] = std::isfinite(e.estimate) ? json(e.estimate) : json("inf");
    c.detail = e.detail;
    r.checks.push_back(std::move(c));
  }
}

// Runs the assumption checks; returns false when the command must stop.
bool assumption_gate(RunReport& r, const Melnikov& m, const RunConfig& c, const CommandOptions& o) {
  const AssumptionReport a = check_assumptions(m.potentials(), c.dim(), c.scheme());
  add_assumption_checks(r, a);
  if (a.all_pass()) return true;
  if (o.force) {
    r.warnings.push_back("potential assumptions fail; continuing because of --force");
    return true;
  }
  r.diagnostic = "potential assumptions fail (use --force to continue)";
  r.exit_code = kCheckFailure;
  return false;
}

bool alpha_gate(RunReport& r, const RunConfig& c) {
  if (c.alpha == 2.0) return true;
  r.diagnostic = "scan and solve need alpha = 2; asymptotics reports the reduced function for alpha < 2";
  r.exit_code = kUsageError;
  return false;
}

GammaLandscape run_scan(RunReport& r, const Melnikov& m, const RunConfig& c, const CommandOptions& o) {
  const ScanBox box = c.scan_box();
  log(o, "scanning " + std::to_string(box.mu_count) + " x " +
             std::to_string(static_cast<long>(std::pow(box.t_count, box.slice_dim()))) + " samples");
  GammaLandscape L = scan_landscape(m, box);
  write_atomic((fs::path(c.output) / "gamma_landscape.csv").string(), landscape_csv(L));
  r.outputs.push_back("gamma_landscape.csv");
  int failed = 0;
  for (const auto& row : L.rows) failed += row.ok ? 0 : 1;
  Check ch;
  ch.name = "landscape samples";
  ch.pass = failed == 0;
  ch.values["rows"] = L.rows.size();
  ch.values["failed"] = failed;
  r.checks.push_back(std::move(ch));
  return L;
}

// Largest 1 / |factor| over the non-kernel spectrum of f''_0(z_0).
double lz_norm(const BlockDiagonalHessian& h) {
  double smallest = std::numeric_limits<double>::infinity();
  for (int l = 0; l <= h.disc().k_max(); ++l)
    for (Eigen::Index k = 0; k < h.real_factors(l).size(); ++k)
      for (double f : {h.real_factors(l)[k], h.imag_factors(l)[k]})
        if (std::abs(f) > h.kernel_threshold()) smallest = std::min(smallest, std::abs(f));
  return 1.0 / smallest;
}

}  // namespace

std::string landscape_csv(const GammaLandscape& L) {
  std::string s = "mu";
  for (int k = 1; k <= L.n; ++k) s += ",xi_" + std::to_string(k);
  s += ",gamma,g2_part,correction_part,quad_err,error\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : L.rows) {
    const GammaSample& g = row.sample;
    s += format_number(g.mu);
    for (int k = 0; k < L.n; ++k) s += "," + format_number(g.xi[k]);
    for (double v : {g.gamma, g.g2_part, g.correction_part, g.quadrature_error})
      s += "," + format_number(row.ok ? v : nan);
    s += "," + quote(row.error) + "\n";
  }
  return s;
}

std::string field_dump(const ComplexField& u, double eps, const std::string& kind) {
  const Discretization& d = *u.disc();
  std::string s;
  s += "# u(x) = mu^{-(N-2)/2} u*((x - xi) / mu), u*(r w) = sum_a Y_a(w) c_a(r)\n";
  s += "# Y_a: real L^2(S^{N-1})-orthonormal harmonics; c_a sampled at the radial nodes r_i\n";
  s += "dimension " + std::to_string(d.dim().n()) + "\n";
  s += "k_max " + std::to_string(d.k_max()) + "\n";
  s += "radial_nodes " + std::to_string(d.n_radial()) + "\n";
  s += "modes " + std::to_string(d.n_modes()) + "\n";
  s += "map_scale " + format_number(d.params().map_scale) + "\n";
  s += "frame_mu " + format_number(u.frame().mu) + "\n";
  s += "frame_xi";
  for (Eigen::Index k = 0; k < u.frame().xi.size(); ++k) s += " " + format_number(u.frame().xi[k]);
  s += "\neps " + format_number(eps) + "\n";
  s += "kind " + kind + "\n";
  s += "r";
  for (int q = 0; q < d.n_radial(); ++q) s += " " + format_number(d.radial().nodes()[q]);
  s += "\n# mode degree re(r_1..r_R) im(r_1..r_R)\n";
  for (int a = 0; a < d.n_modes(); ++a) {
    s += std::to_string(a) + " " + std::to_string(d.degree_of_mode(a));
    for (int q = 0; q < d.n_radial(); ++q) s += " " + format_number(u.re()(a, q));
    for (int q = 0; q < d.n_radial(); ++q) s += " " + format_number(u.im()(a, q));
    s += "\n";
  }
  return s;
}

// ---------------------------------------------------------------- check-potentials

RunReport cmd_check_potentials(const RunConfig& c, const CommandOptions& o) {
  RunReport r = start("check-potentials", c);
  const PotentialPair pot = make_pair(c, o);
  const AssumptionReport a = check_assumptions(pot, c.dim(), c.scheme());
  add_assumption_checks(r, a);
  if (o.log) {
    std::ostringstream t;
    t << "assumption  exponent  estimate              pass  detail\n";
    for (const auto& e : a.entries) {
      std::string est = std::isfinite(e.estimate) ? format_number(e.estimate) : "inf";
      est.resize(std::max<std::size_t>(est.size(), 20), ' ');
      std::string name = e.name, ex = format_number(e.exponent);
      name.resize(std::max<std::size_t>(name.size(), 10), ' ');
      ex.resize(std::max<std::size_t>(ex.size(), 8), ' ');
      t << name << "  " << ex << "  " << est << "  " << (e.pass ? "yes " : "no  ") << "  " << e.detail
        << "\n";
    }
    *o.log << t.str() << std::flush;
  }
  r.exit_code = a.all_pass() ? kOk : kCheckFailure;
  return finish(r);
}

// ---------------------------------------------------------------- scan

RunReport cmd_scan(const RunConfig& c, const CommandOptions& o) {
  RunReport r = start("scan", c);
  if (!alpha_gate(r, c)) return finish(r);
  const Session s = open_session(c, o);
  if (!assumption_gate(r, *s.m, c, o)) return finish(r);
  run_scan(r, *s.m, c, o);
  return finish(r);
}

// ---------------------------------------------------------------- asymptotics

RunReport cmd_asymptotics(const RunConfig& c, const CommandOptions& o) {
  RunReport r = start("asymptotics", c);
  const Session s = open_session(c, o);
  if (!assumption_gate(r, *s.m, c, o)) return finish(r);
  const Melnikov& m = *s.m;
  const PotentialPair& pot = m.potentials();
  const int n = c.dimension;
  const BubbleNorms bn = bubble_norms(s.dim);
  const auto points = c.test_points();
  const double tol = 0.02;

  // Decay along the three rays and at the far corner of the box.
  {
    log(o, "boundary decay");
    DecayOptions d;
    d.boundary_ratio = c.asymptotics_ratio;
    d.boundary_mu = c.scan_mu_max;
    if (!c.scan_direction1.empty()) {
      d.direction = Eigen::Map<const Eigen::VectorXd>(c.scan_direction1.data(), n).normalized();
    }
    const DecayReport rep = boundary_decay_check(m, d);
    Check ch;
    ch.name = "boundary decay";
    ch.pass = rep.all_pass();
    json rows = json::array();
    for (const auto& row : rep.rows) {
      json e;
      e["ray"] = row.ray;
      e["mu"] = row.mu;
      e["xi"] = vec_json(row.xi);
      e["value"] = row.value;
      e["scaled"] = row.scaled;
      rows.push_back(std::move(e));
    }
    ch.values["rows"] = std::move(rows);
    ch.values["interior_max"] = rep.interior_max;
    ch.values["boundary_value"] = rep.boundary_value;
    ch.values["ratio_bound"] = c.asymptotics_ratio;
    ch.values["small_mu"] = rep.small_mu_pass;
    ch.values["far_xi"] = rep.far_xi_pass;
    ch.values["large_mu"] = rep.large_mu_pass;
    ch.values["boundary"] = rep.boundary_pass;
    ch.detail = "|Gamma| at mu = " + format_number(d.boundary_mu) + ", |xi| = " + format_number(d.boundary_xi) +
                " against " + format_number(c.asymptotics_ratio) + " of the interior maximum";
    r.checks.push_back(std::move(ch));
  }

  // Scale for relative errors when the expected limit vanishes.
  double scale = 0.0;
  for (const auto& xi : points)
    scale = std::max({scale, 0.5 * bn.l2 * std::abs(pot.V(xi)), 0.5 * bn.l2 * pot.A(xi).squaredNorm()});

  // Gamma / mu^2 -> 1/2 V(xi) int z_0^2.
  for (const auto& xi : points) {
    log(o, "small-mu limit at xi = " + vec_text(xi));
    const double expect = gamma_smallmu_closed_form(xi, pot, s.dim);
    const RichardsonResult rr = richardson_limit([&](double mu) { return m.gamma(mu, xi).gamma / (mu * mu); });
    const double denom = std::max(std::abs(expect), expect == 0.0 ? scale : 0.0);
    const double err = denom > 0 ? std::abs(rr.limit - expect) / denom : std::abs(rr.limit);
    Check ch;
    ch.name = "small-mu limit";
    ch.pass = denom > 0 ? err <= tol : rr.limit == 0.0;
    ch.values["xi"] = vec_json(xi);
    ch.values["mu"] = rr.mu;
    ch.values["gamma_over_mu2"] = rr.values;
    ch.values["limit"] = rr.limit;
    ch.values["expected"] = expect;
    ch.values["relative_error"] = err;
    ch.values["tolerance"] = tol;
    ch.detail = "Richardson limit of Gamma/mu^2 against 1/2 V(xi) int z_0^2";
    r.checks.push_back(std::move(ch));
  }

  // With V = 0 the magnetic part of G2 and the correction cancel in the limit.
  {
    const Melnikov mv(PotentialPair{pot.A, ElectricPotential::zero(), pot.r_exponent, pot.s_exponent}, s.disc,
                      s.hess);
    for (const auto& xi : points) {
      const double a2 = 0.5 * pot.A(xi).squaredNorm() * bn.l2;
      Check ch;
      ch.name = "magnetic cancellation";
      ch.values["xi"] = vec_json(xi);
      ch.values["expected_magnetic"] = a2;
      if (pot.A.is_zero() || a2 == 0.0) {
        ch.pass = true;
        ch.values["limit_magnetic"] = 0.0;
        ch.values["limit_correction"] = 0.0;
        ch.values["limit_sum"] = 0.0;
        ch.detail = "A(xi) = 0: both contributions are trivially 0";
        r.checks.push_back(std::move(ch));
        continue;
      }
      log(o, "magnetic cancellation at xi = " + vec_text(xi));
      const RichardsonResult mag =
          richardson_limit([&](double mu) { return mv.gamma(mu, xi).g2_magnetic / (mu * mu); });
      const RichardsonResult cor =
          richardson_limit([&](double mu) { return mv.gamma(mu, xi).correction_part / (mu * mu); });
      const RichardsonResult sum = richardson_limit([&](double mu) { return mv.gamma(mu, xi).gamma / (mu * mu); });
      const double e_mag = std::abs(mag.limit - a2) / a2, e_cor = std::abs(cor.limit + a2) / a2,
                   e_sum = std::abs(sum.limit) / a2;
      ch.pass = e_mag <= tol && e_cor <= tol && e_sum <= tol;
      ch.values["limit_magnetic"] = mag.limit;
      ch.values["limit_correction"] = cor.limit;
      ch.values["limit_sum"] = sum.limit;
      ch.values["relative_errors"] = {e_mag, e_cor, e_sum};
      ch.values["tolerance"] = tol;
      ch.detail = "limits of H2/mu^2 -> 1/2 |A(xi)|^2 int z_0^2, correction/mu^2 -> its negative, sum -> 0";
      r.checks.push_back(std::move(ch));
    }
  }

  // ||phi||_E <= ||L|| S^{-1/2} (2 ||A||_N ||grad z_0||_2 + ||div A||_{N/2} ||z_0||_{2*}).
  {
    log(o, "correction bound");
    Eigen::VectorXd dir = Eigen::VectorXd::Unit(n, 0);
    if (!c.scan_direction1.empty()) dir = Eigen::Map<const Eigen::VectorXd>(c.scan_direction1.data(), n);
    double bound = 0.0, a_norm = 0.0, div_norm = 0.0;
    const double ts = s.dim.two_star();
    const double sobolev = bn.dirichlet / std::pow(bn.l2star, 2.0 / ts);
    if (!pot.A.is_zero()) {
      const LpEstimate an = lp_norm_estimate([&](const Eigen::VectorXd& x) { return pot.A(x).norm(); }, n,
                                             s.dim, c.scheme());
      const LpEstimate dn = lp_norm_estimate([&](const Eigen::VectorXd& x) { return pot.A.divergence(x); },
                                             0.5 * n, s.dim, c.scheme());
      a_norm = an.norm;
      div_norm = dn.norm;
      bound = lz_norm(*s.hess) / std::sqrt(sobolev) *
              (2.0 * a_norm * std::sqrt(bn.dirichlet) + div_norm * std::pow(bn.l2star, 1.0 / ts));
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    json grid = json::array();
    for (double mu : {0.1, 0.3, 1.0, 3.0, 10.0})
      for (double t : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const double v = m.gamma(mu, t * dir).phi_norm;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        grid.push_back({mu, t, v});
      }
    Check ch;
    ch.name = "correction bound";
    ch.pass = std::isfinite(bound) && hi <= bound;
    ch.values["grid"] = std::move(grid);
    ch.values["max_phi_norm"] = hi;
    ch.values["min_phi_norm"] = lo;
    ch.values["bound"] = bound;
    ch.values["lz_norm"] = lz_norm(*s.hess);
    ch.values["sobolev_constant"] = sobolev;
    ch.values["A_LN"] = a_norm;
    ch.values["divA_LN2"] = div_norm;
    ch.detail = "max ||phi||_E over mu in {0.1,..,10} x t in {-2,..,2} against the constant from ||L_z||, "
                "the Sobolev constant and the Lebesgue norms of A and div A";
    r.checks.push_back(std::move(ch));
  }

  // ||phi*|| -> 0 as mu -> 0; frames are scale invariant so ||phi*|| = ||phi||_E.
  {
    const Eigen::VectorXd xi = points.size() > 1 ? points[1] : points[0];
    log(o, "correction decay at xi = " + vec_text(xi));
    std::vector<double> mus = {1.0, 0.3, 0.1, 0.03}, norms;
    for (double mu : mus) norms.push_back(m.gamma(mu, xi).phi_norm);
    bool decreasing = true;
    for (std::size_t k = 1; k < norms.size(); ++k) decreasing = decreasing && norms[k] < norms[k - 1];
    const double last = norms[2] > 0 ? norms[3] / norms[2] : 0.0;
    Check ch;
    ch.name = "correction decay";
    ch.pass = pot.A.is_zero() || (decreasing && last <= 0.5);
    ch.values["xi"] = vec_json(xi);
    ch.values["mu"] = mus;
    ch.values["phi_norm"] = norms;
    ch.values["last_ratio"] = last;
    ch.detail = "||phi*||_E strictly decreasing in mu with the last step ratio at most 0.5";
    r.checks.push_back(std::move(ch));
  }

  if (c.alpha < 2.0) {
    for (const auto& xi : points) {
      const double expect = 0.5 * pot.V(xi) * bn.l2;
      const RichardsonResult rr =
          richardson_limit([&](double mu) { return m.gamma_alpha(mu, xi, c.alpha) / (mu * mu); });
      const double denom = std::max(std::abs(expect), expect == 0.0 ? scale : 0.0);
      const double err = denom > 0 ? std::abs(rr.limit - expect) / denom : std::abs(rr.limit);
      Check ch;
      ch.name = "reduced function for alpha < 2";
      ch.pass = denom > 0 ? err <= tol : rr.limit == 0.0;
      ch.values["alpha"] = c.alpha;
      ch.values["xi"] = vec_json(xi);
      ch.values["limit"] = rr.limit;
      ch.values["expected"] = expect;
      ch.values["relative_error"] = err;
      ch.detail = "1/2 int V |z|^2 / mu^2 against 1/2 V(xi) int z_0^2";
      r.checks.push_back(std::move(ch));
    }
  }

  r.exit_code = r.all_pass() ? kOk : kCheckFailure;
  return finish(r);
}

// ---------------------------------------------------------------- solve

RunReport cmd_solve(const RunConfig& c, const CommandOptions& o) {
  RunReport r = start("solve", c);
  if (!alpha_gate(r, c)) return finish(r);
  const Session s = open_session(c, o);
  if (!assumption_gate(r, *s.m, c, o)) return finish(r);
  const Melnikov& m = *s.m;
  const GammaLandscape L = run_scan(r, m, c, o);
  log(o, "searching critical points");
  const SearchResult sr = find_critical_points(m, L, c.search());
  for (const auto& w : sr.warnings) r.warnings.push_back(w);
  {
    Check ch;
    ch.name = "critical points";
    ch.pass = !sr.points.empty();
    json pts = json::array();
    for (const auto& p : sr.points) {
      json e;
      e["kind"] = to_string(p.kind);
      e["mu"] = p.mu;
      e["xi"] = vec_json(p.xi);
      e["gamma"] = p.value;
      e["gradient_norm"] = p.gradient_norm;
      e["basin_radius"] = p.basin_radius;
      pts.push_back(std::move(e));
    }
    ch.values["points"] = std::move(pts);
    ch.values["merge_radius"] = sr.merge_radius;
    ch.detail = sr.diagnostic;
    r.checks.push_back(std::move(ch));
  }
  if (sr.flat || sr.points.empty()) {
    r.diagnostic = sr.diagnostic.empty() ? "no critical points found" : sr.diagnostic;
    r.exit_code = kNoSolution;
    return finish(r);
  }

  const int n = c.dimension;
  std::string csv = "eps,mu";
  for (int k = 1; k <= n; ++k) csv += ",xi_" + std::to_string(k);
  csv += ",kind,gamma,f_eps,residual_perp,residual_tangent\n";
  for (double eps : c.epsilon)
    for (std::size_t p = 0; p < sr.points.size(); ++p) {
      const CriticalPoint& cp = sr.points[p];
      log(o, "assembling point " + std::to_string(p) + " at eps = " + format_number(eps));
      const ReducedSolution sol = assemble_solution(m, cp, eps, c.eps_max);
      csv += format_number(eps) + "," + format_number(cp.mu);
      for (int k = 0; k < n; ++k) csv += "," + format_number(cp.xi[k]);
      csv += std::string(",") + to_string(cp.kind) + "," + format_number(cp.value) + "," +
             format_number(sol.energy.f_eps) + "," + format_number(sol.residual_perp) + "," +
             format_number(sol.residual_tangent) + "\n";
      const std::string name = "fields/solution_" + std::to_string(p) + "_eps_" + format_number(eps) + ".txt";
      write_atomic((fs::path(c.output) / name).string(), field_dump(sol.u, eps, to_string(cp.kind)));
      r.outputs.push_back(name);
    }
  write_atomic((fs::path(c.output) / "solutions.csv").string(), csv);
  r.outputs.insert(r.outputs.begin() + 1, "solutions.csv");
  r.exit_code = kOk;
  return finish(r);
}

// ---------------------------------------------------------------- verify

RunReport cmd_verify(const RunConfig& c, const CommandOptions& o) {
  RunReport r = start("verify", c);
  const Session s = open_session(c, o);
  const Melnikov& m = *s.m;
  const Dimension& dim = s.dim;
  const int n = dim.n();
  const auto& disc = s.disc;
  const auto& h = *s.hess;
  std::mt19937_64 rng(c.seed);
  auto add = [&](std::string name, bool pass, json values, std::string detail) {
    r.checks.push_back({std::move(name), pass, std::move(values), std::move(detail)});
  };

  const BubbleNorms bn = bubble_norms(dim);
  {
    const double rel = std::abs(bn.dirichlet - bn.l2star) / bn.l2star;
    add("Nehari identity", rel <= 1e-8, {{"dirichlet", bn.dirichlet}, {"l2star", bn.l2star}, {"relative", rel}},
        "int |grad z_0|^2 = int z_0^{2*}");
    const double k = kappa(dim);
    const double oracle = dim.sphere_area() * k * k * 0.5 * boost::math::beta(0.5 * n, 0.5 * n - 2.0);
    const double e = std::abs(bn.l2 - oracle) / oracle;
    add("L2 norm against the Beta function", e <= 1e-8, {{"l2", bn.l2}, {"oracle", oracle}, {"relative", e}},
        "int z_0^2 = |S^{N-1}| kappa^2 B(N/2, N/2 - 2) / 2");
  }
  {
    std::uniform_real_distribution<double> sig(0.0, 2.0 * std::numbers::pi), lmu(std::log(0.1), std::log(10.0)),
        x(-2.0, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 25; ++k) {
      const double sg = sig(rng), mu = std::exp(lmu(rng));
      Eigen::VectorXd xi(n);
      for (int j = 0; j < n; ++j) xi[j] = x(rng);
      worst = std::max(worst, std::abs(G1(bubble_field(Bubble(sg, mu, xi), disc), m.potentials().A)));
    }
    add("G1 vanishes on the critical manifold", worst < 1e-7, {{"max_abs_G1", worst}, {"samples", 25}},
        "random (sigma, mu, xi) with mu in [0.1, 10], xi in [-2, 2]^N");
  }
  {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
    xi[0] = 0.7;
    const KernelCount a = kernel_dimension_check(h, Bubble::unit(dim));
    const KernelCount b = kernel_dimension_check(h, Bubble(0.4, 2.0, xi));
    const bool pass = a.imag_kernel == 1 && a.real_kernel == n + 1 && b.imag_kernel == 1 && b.real_kernel == n + 1;
    add("kernel dimensions", pass, {{"imag", a.imag_kernel}, {"real", a.real_kernel}, {"expected", n + 2}},
        "one imaginary (degree 0) and N + 1 real (degree 1) zero modes");
    add("analytic sphere factors", h.analytic_deviation() < 1e-6, {{"deviation", h.analytic_deviation()}},
        "discrete block factors against (lambda_k - N) / (lambda_k + N(N-2)/4) and lambda_k / (...)");
  }
  {
    const Bubble b = Bubble::unit(dim);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    a[0] = 0.7;
    a[1] = -0.2;
    a[n - 1] = 0.4;
    const ComplexField src = ComplexField::sample(disc, b.frame(), [&](const Eigen::VectorXd& y) {
      const double rr = y.norm();
      return rr > 0 ? cd(0.0, -2.0 * unit_bubble_dr(rr, dim) * a.dot(y) / rr) : cd(0.0);
    });
    Load k(disc, b.frame());
    const Eigen::VectorXd& w = disc->radial_measure();
    for (int q = 0; q < disc->n_radial(); ++q) {
      k.re.col(q) = src.re().col(q) * w[q];
      k.im.col(q) = src.im().col(q) * w[q];
    }
    const LzResult res = apply_Lz(h, b, k);
    const ComplexField expect = ComplexField::sample(
        disc, b.frame(), [&](const Eigen::VectorXd& y) { return cd(0.0, unit_bubble(y.norm(), dim) * a.dot(y)); });
    const double e = (res.phi - expect).e_norm() / expect.e_norm();
    add("closed-form linearized solve", e <= 1e-4, {{"relative_error", e}},
        "L_z of (2/i) grad z_0 . a against i z_0 a . x");

    Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
    xi[0] = 0.2;
    const Bubble bb(0.3, 0.5, xi);
    double worst = 0.0;
    for (const auto& v : tangent_basis(bb, disc).vectors)
      worst = std::max(worst, apply_Lz(h, bb, v).phi.e_norm() / v.e_norm());
    add("tangent vectors solve to zero", worst < 1e-8, {{"max_relative", worst}}, "L_z on T_z Z");
  }
  {
    const Transplant T(dim);
    const double c0 = kappa(dim) / std::pow(2.0, 0.5 * (n - 2));
    const SphereCoefficients co = T.transplant(bubble_field(Bubble::unit(dim), disc));
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd zeta(n + 1);
      for (int j = 0; j <= n; ++j) zeta[j] = g(rng);
      zeta.normalize();
      worst = std::max(worst, std::abs(T.sphere_value(co, disc->angular(), zeta) - c0) / c0);
    }
    add("stereographic transplant of the bubble", worst < 1e-9, {{"max_relative", worst}, {"constant", c0}},
        "z_0 / phi is the constant kappa / 2^{(N-2)/2} on S^N");
  }
  {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
    xi[0] = 0.3;
    const GammaSample g = m.gamma(1.0, xi);
    const double e = std::abs(g.correction_part - g.correction_alt) / std::max(1e-300, std::abs(g.correction_part));
    add("correction evaluation paths", g.correction_part == 0.0 || e <= 1e-8,
        {{"correction_part", g.correction_part}, {"alternative", g.correction_alt}, {"relative", e}},
        "1/2 <G1'(z), phi> directly and through the Riesz representative");
    double worst = 0.0;
    for (double sg : {1.0, 2.0})
      worst = std::max(worst, std::abs(m.gamma(1.0, xi, sg).gamma - g.gamma) / std::max(1e-300, std::abs(g.gamma)));
    add("phase invariance of Gamma", worst <= 1e-10, {{"max_relative", worst}}, "Gamma at sigma = 0, 1, 2");
  }
  {
    const auto pts = c.test_points();
    const Eigen::VectorXd xi = pts.size() > 1 ? pts[1] : pts[0];
    const double expect = gamma_smallmu_closed_form(xi, m.potentials(), dim);
    const RichardsonResult rr = richardson_limit([&](double mu) { return m.gamma(mu, xi).gamma / (mu * mu); });
    const double e = expect != 0.0 ? std::abs(rr.limit - expect) / std::abs(expect) : std::abs(rr.limit);
    add("small-mu limit", e <= 0.02, {{"xi", vec_json(xi)}, {"limit", rr.limit}, {"expected", expect},
                                      {"relative_error", e}},
        "Richardson limit of Gamma/mu^2 against 1/2 V(xi) int z_0^2");
  }
  {
    const DecayReport rep = boundary_decay_check(m);
    add("boundary decay", rep.all_pass(),
        {{"interior_max", rep.interior_max}, {"boundary_value", rep.boundary_value}},
        "|Gamma| on the mu -> 0, |xi| -> inf and mu -> inf rays and at the far corner");
  }
  {
    std::normal_distribution<double> g;
    double worst = -std::numeric_limits<double>::infinity();
    double identity = 0.0;
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXcd coef(n);
      for (int j = 0; j < n; ++j) coef[j] = cd(g(rng), g(rng));
      const cd c0(g(rng), g(rng));
      const ComplexField u = ComplexField::sample(disc, Frame::unit(dim), [&](const Eigen::VectorXd& y) {
        return (c0 + (coef.transpose() * y.cast<cd>())(0)) * std::exp(-0.5 * y.squaredNorm());
      });
      const double mod = modulus_dirichlet(u);
      for (double eps : {0.1, 1.0}) worst = std::max(worst, mod / magnetic_dirichlet(u, m.potentials().A, eps));
      const EnergyBreakdown e = energy(u, m.potentials(), 0.05);
      identity = std::max(identity, std::abs(e.f_eps - (e.f0 + 0.05 * e.g1 + 0.0025 * e.g2)) / std::abs(e.f_eps));
    }
    add("diamagnetic inequality", worst <= 1.0 + 1e-10, {{"max_ratio", worst}},
        "int |grad |u||^2 <= int |(grad/i - eps A) u|^2 on random fields");
    add("energy identity", identity <= 1e-14, {{"max_relative", identity}}, "f_eps = f0 + eps G1 + eps^2 G2");
  }

  r.exit_code = r.all_pass() ? kOk : kCheckFailure;
  return finish(r);
}

}  // namespace critmag::cli
