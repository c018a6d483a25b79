#include "critmag_cli/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "critmag/errors.hpp"

namespace critmag::cli {

namespace {

// ---------------------------------------------------------------- value codecs

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw std::invalid_argument("expected a number, got '" + t + "'");
  return v;
}

template <class I>
I parse_integer(const std::string& s) {
  const std::string t = trim(s);
  I v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw std::invalid_argument("expected an integer, got '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

std::vector<double> parse_vector(const std::string& s) {
  std::vector<double> v;
  if (trim(s).empty()) return v;
  for (const auto& p : split(s, ',')) v.push_back(parse_double(p));
  return v;
}

std::string fmt_vector(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_double(v[i]);
  return s;
}

std::vector<std::vector<double>> parse_vectors(const std::string& s) {
  std::vector<std::vector<double>> out;
  if (trim(s).empty()) return out;
  for (const auto& p : split(s, ';')) {
    auto v = parse_vector(p);
    if (v.empty()) throw std::invalid_argument("empty vector in list");
    out.push_back(std::move(v));
  }
  return out;
}

std::string fmt_vectors(const std::vector<std::vector<double>>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + fmt_vector(v[i]);
  return s;
}

// ---------------------------------------------------------------- key table

struct Key {
  std::string name;
  std::string doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define CRITMAG_NUM(key, member, doc)                                                  \
  Key {                                                                                \
    key, doc, [](const RunConfig& c) { return fmt_double(c.member); },                 \
        [](RunConfig& c, const std::string& v) { c.member = parse_double(v); }         \
  }
#define CRITMAG_INT(key, member, doc)                                                  \
  Key {                                                                                \
    key, doc, [](const RunConfig& c) { return std::to_string(c.member); },             \
        [](RunConfig& c, const std::string& v) {                                       \
          c.member = parse_integer<decltype(RunConfig::member)>(v);                    \
        }                                                                              \
  }
#define CRITMAG_STR(key, member, doc)                                                  \
  Key {                                                                                \
    key, doc, [](const RunConfig& c) { return c.member; },                             \
        [](RunConfig& c, const std::string& v) { c.member = trim(v); }                 \
  }
#define CRITMAG_VEC(key, member, doc)                                                  \
  Key {                                                                                \
    key, doc, [](const RunConfig& c) { return fmt_vector(c.member); },                 \
        [](RunConfig& c, const std::string& v) { c.member = parse_vector(v); }         \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      CRITMAG_INT("dimension", dimension, "space dimension N > 4"),
      CRITMAG_NUM("alpha", alpha, "exponent of eps in front of V, in [1, 2]; scan and solve need 2"),
      Key{"epsilon", "eps values for solve, each in [0, eps_max]",
          [](const RunConfig& c) { return fmt_vector(c.epsilon); },
          [](RunConfig& c, const std::string& v) { c.epsilon = parse_vector(v); }},
      CRITMAG_NUM("eps_max", eps_max, "largest eps accepted by solve"),
      CRITMAG_INT("seed", seed, "seed for every random draw (QMC scrambling, sample clouds)"),
      CRITMAG_STR("output", output, "output directory"),
      CRITMAG_INT("threads", threads, "OpenMP threads; 0 keeps the runtime default"),
      CRITMAG_INT("discretization.k_max", k_max, "largest harmonic degree"),
      CRITMAG_INT("discretization.radial_nodes", radial_nodes, "radial nodes"),
      CRITMAG_NUM("discretization.map_scale", map_scale, "radial map scale L in r = L t / (1 - t)"),
      CRITMAG_STR("quadrature.mode", quadrature_mode, "product-gauss or qmc (R^N integrals)"),
      CRITMAG_NUM("quadrature.rel_tol", quadrature_rel_tol, "relative tolerance of R^N integrals"),
      CRITMAG_INT("quadrature.max_points", quadrature_max_points, "point budget of R^N integrals"),
      CRITMAG_NUM("potential.r_exponent", r_exponent, "L^r exponent for A in (1, N); 0 selects N/2"),
      CRITMAG_NUM("potential.s_exponent", s_exponent, "L^s exponent for V in (1, N/2); 0 selects N/4"),
      CRITMAG_STR("potential.A.family", a_family, "gaussian-envelope, algebraic-decay or user-table"),
      CRITMAG_VEC("potential.A.amplitude", a_amplitude, "vector a; empty selects e_1"),
      CRITMAG_NUM("potential.A.lambda", a_lambda, "gaussian width parameter"),
      CRITMAG_NUM("potential.A.power", a_power, "algebraic decay power p"),
      CRITMAG_VEC("potential.A.center", a_center, "centre c; empty selects 0"),
      CRITMAG_NUM("potential.A.swirl", a_swirl, "divergence-free rotation b in the (x_1, x_2) plane"),
      CRITMAG_STR("potential.A.table", a_table, "user-table file: rows x_1..x_N A_1..A_N"),
      CRITMAG_STR("potential.A.divergence_table", a_divergence_table,
                  "user-table file: rows x_1..x_N div A"),
      CRITMAG_STR("potential.V.family", v_family,
                  "gaussian, algebraic-decay, sign-changing-gaussian or user-table"),
      CRITMAG_NUM("potential.V.amplitude", v_amplitude, "amplitude v"),
      CRITMAG_VEC("potential.V.direction", v_direction, "direction d (sign-changing); empty selects e_1"),
      CRITMAG_NUM("potential.V.lambda", v_lambda, "gaussian width parameter"),
      CRITMAG_NUM("potential.V.power", v_power, "algebraic decay power p"),
      CRITMAG_VEC("potential.V.center", v_center, "centre c; empty selects 0"),
      CRITMAG_STR("potential.V.table", v_table, "user-table file: rows x_1..x_N V"),
      CRITMAG_NUM("scan.mu_min", scan_mu_min, "smallest mu (log-spaced grid)"),
      CRITMAG_NUM("scan.mu_max", scan_mu_max, "largest mu"),
      CRITMAG_INT("scan.mu_count", scan_mu_count, "number of mu values"),
      CRITMAG_VEC("scan.direction1", scan_direction1, "first slice direction; empty selects e_1"),
      CRITMAG_VEC("scan.direction2", scan_direction2, "second slice direction; empty gives a line slice"),
      CRITMAG_NUM("scan.t_min", scan_t_min, "smallest slice coordinate"),
      CRITMAG_NUM("scan.t_max", scan_t_max, "largest slice coordinate"),
      CRITMAG_INT("scan.t_count", scan_t_count, "slice values per direction"),
      CRITMAG_INT("search.max_starts", search_max_starts, "multistart budget"),
      CRITMAG_NUM("search.grad_tol", search_grad_tol, "gradient tolerance; 0 selects 1e-5 max|Gamma|"),
      CRITMAG_NUM("search.merge_fraction", search_merge_fraction, "merge radius as a fraction of the box diagonal"),
      Key{"asymptotics.xi", "test centres 'x,..; x,..'; empty selects 0, (0.5,-0.3,0..), (-0.4,0,0.6,0,0.2,0..)",
          [](const RunConfig& c) { return fmt_vectors(c.asymptotics_xi); },
          [](RunConfig& c, const std::string& v) { c.asymptotics_xi = parse_vectors(v); }},
      CRITMAG_NUM("asymptotics.ratio", asymptotics_ratio, "boundary |Gamma| / interior max bound"),
  };
  return k;
}

#undef CRITMAG_NUM
#undef CRITMAG_INT
#undef CRITMAG_STR
#undef CRITMAG_VEC

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base) / p).string();
}

}  // namespace

std::vector<KeyDoc> documented_keys() {
  const RunConfig d;
  std::vector<KeyDoc> out;
  for (const auto& k : keys()) out.push_back({k.name, k.get(d), k.doc});
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, const Key*> index;
  for (const auto& k : keys()) index[k.name] = &k;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    // Comments start at '#' at the beginning of the line or after whitespace.
    for (std::size_t p = line.find('#'); p != std::string::npos; p = line.find('#', p + 1)) {
      if (p == 0 || line[p - 1] == ' ' || line[p - 1] == '\t') {
        line.resize(p);
        break;
      }
    }
    if (trim(line).empty()) continue;
    const auto first = static_cast<int>(line.find_first_not_of(" \t")) + 1;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", ln, first);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("missing key before '='", ln, first);
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError("unknown key '" + key + "'", ln, first);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", ln, first);
    const std::string raw = line.substr(eq + 1);
    const auto vpos = raw.find_first_not_of(" \t");
    const int vcol = static_cast<int>(eq) + 2 + static_cast<int>(vpos == std::string::npos ? 0 : vpos);
    try {
      it->second->set(c, raw);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what(), ln, vcol);
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string echo(const RunConfig& c) {
  std::string s;
  for (const auto& k : keys()) {
    const std::string v = k.get(c);
    s += k.name + " =" + (v.empty() ? "" : " " + v) + "\n";
  }
  return s;
}

void validate(const RunConfig& c) {
  if (c.dimension <= 4) throw ConfigError("dimension must exceed 4");
  const auto n = static_cast<std::size_t>(c.dimension);
  auto vec_len = [&](const std::vector<double>& v, const char* key) {
    if (!v.empty() && v.size() != n)
      throw ConfigError(std::string(key) + " needs " + std::to_string(n) + " components");
  };
  vec_len(c.a_amplitude, "potential.A.amplitude");
  vec_len(c.a_center, "potential.A.center");
  vec_len(c.v_direction, "potential.V.direction");
  vec_len(c.v_center, "potential.V.center");
  vec_len(c.scan_direction1, "scan.direction1");
  vec_len(c.scan_direction2, "scan.direction2");
  for (const auto& x : c.asymptotics_xi) vec_len(x, "asymptotics.xi");
  if (!c.scan_direction2.empty() && c.scan_direction1.empty())
    throw ConfigError("scan.direction2 needs scan.direction1");
  if (!(c.alpha >= 1.0 && c.alpha <= 2.0)) throw ConfigError("alpha must lie in [1, 2]");
  if (!(c.eps_max > 0.0)) throw ConfigError("eps_max must be positive");
  for (double e : c.epsilon)
    if (!(e >= 0.0 && e <= c.eps_max))
      throw ConfigError("epsilon value " + fmt_double(e) + " outside [0, eps_max]");
  if (c.k_max < 1) throw ConfigError("discretization.k_max must be at least 1");
  if (c.quadrature_mode != "product-gauss" && c.quadrature_mode != "qmc")
    throw ConfigError("quadrature.mode must be product-gauss or qmc");
  if (c.threads < 0) throw ConfigError("threads must be non-negative");
  if (!(c.search_merge_fraction > 0.0)) throw ConfigError("search.merge_fraction must be positive");
  if (c.search_max_starts < 1) throw ConfigError("search.max_starts must be positive");
  if (!(c.asymptotics_ratio > 0.0)) throw ConfigError("asymptotics.ratio must be positive");
  try {
    c.scan_box().validate(c.dimension);
    c.scheme().validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

DiscretizationParams RunConfig::discretization() const {
  DiscretizationParams p;
  p.k_max = k_max;
  p.radial_nodes = radial_nodes;
  p.map_scale = map_scale;
  return p;
}

IntegrationScheme RunConfig::scheme() const {
  IntegrationScheme s = IntegrationScheme::defaults_for(dim());
  s.mode = quadrature_mode == "qmc" ? IntegrationScheme::Mode::RandomizedQmc
                                    : IntegrationScheme::Mode::ProductGauss;
  s.rel_tol = quadrature_rel_tol;
  s.max_points = quadrature_max_points;
  s.seed = seed;
  return s;
}

PotentialConfig RunConfig::potential(const std::string& base_dir) const {
  PotentialConfig p;
  p.r_exponent = r_exponent;
  p.s_exponent = s_exponent;
  p.A.family = a_family;
  p.A.amplitude = to_eigen(a_amplitude);
  p.A.lambda = a_lambda;
  p.A.power = a_power;
  p.A.center = to_eigen(a_center);
  p.A.swirl = a_swirl;
  if (!a_table.empty()) p.A.table = load_table(resolve(a_table, base_dir), dimension, dimension);
  if (!a_divergence_table.empty())
    p.A.divergence_table = load_table(resolve(a_divergence_table, base_dir), dimension, 1);
  p.V.family = v_family;
  p.V.amplitude = v_amplitude;
  p.V.direction = to_eigen(v_direction);
  p.V.lambda = v_lambda;
  p.V.power = v_power;
  p.V.center = to_eigen(v_center);
  if (!v_table.empty()) p.V.table = load_table(resolve(v_table, base_dir), dimension, 1);
  return p;
}

ScanBox RunConfig::scan_box() const {
  ScanBox b;
  b.mu_min = scan_mu_min;
  b.mu_max = scan_mu_max;
  b.mu_count = scan_mu_count;
  b.t_min = scan_t_min;
  b.t_max = scan_t_max;
  b.t_count = scan_t_count;
  if (!scan_direction1.empty()) b.directions.push_back(to_eigen(scan_direction1));
  if (!scan_direction2.empty()) b.directions.push_back(to_eigen(scan_direction2));
  return b;
}

SearchOptions RunConfig::search() const {
  SearchOptions o;
  o.max_starts = search_max_starts;
  o.grad_tol = search_grad_tol;
  o.merge_fraction = search_merge_fraction;
  return o;
}

std::vector<Eigen::VectorXd> RunConfig::test_points() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& x : asymptotics_xi) out.push_back(to_eigen(x));
  if (!out.empty()) return out;
  const int n = dimension;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), b = a, c = a;
  b[0] = 0.5;
  b[1] = -0.3;
  c[0] = -0.4;
  c[2] = 0.6;
  c[4] = 0.2;
  return {a, b, c};
}

PotentialTable load_table(const std::string& path, int n, int components) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open table '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int ln = 0;
  while (std::getline(f, line)) {
    ++ln;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream is(line);
    std::vector<double> row;
    std::string tok;
    while (is >> tok) {
      try {
        row.push_back(parse_double(tok));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what(), ln);
      }
    }
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != n + components)
      throw ConfigError(path + ": expected " + std::to_string(n + components) + " columns", ln);
    rows.push_back(std::move(row));
  }
  PotentialTable t;
  t.points.resize(n, static_cast<Eigen::Index>(rows.size()));
  t.values.resize(components, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (int k = 0; k < n; ++k) t.points(k, j) = rows[j][k];
    for (int k = 0; k < components; ++k) t.values(k, j) = rows[j][n + k];
  }
  return t;
}

}  // namespace critmag::cli
