#include <chrono>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "critmag/errors.hpp"
#include "critmag_cli/commands.hpp"
#include "critmag_cli/run.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace critmag::cli {

namespace {

int usage_error(const std::string& msg) {
  std::cerr << "critmag: " << msg << "\n";
  return kUsageError;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Melnikov reduction toolkit for the critical magnetic Schroedinger equation"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = -1;
  bool force = false;
  long long seed = -1;
  bool quiet = false;
  app.add_option("--config", config_path, "config file (key = value lines)");
  app.add_option("--out", out_dir, "output directory (overrides 'output')");
  app.add_option("--threads", threads, "OpenMP threads (overrides 'threads')")->check(CLI::NonNegativeNumber);
  app.add_flag("--force", force, "continue when the potential assumptions fail");
  app.add_option("--seed", seed, "seed (overrides 'seed')")->check(CLI::NonNegativeNumber);
  app.add_flag("-q,--quiet", quiet, "no progress output");
  app.fallthrough();

  struct Sub {
    const char* name;
    const char* help;
    RunReport (*run)(const RunConfig&, const CommandOptions&);
  };
  const Sub subs[] = {
      {"check-potentials", "check the integrability assumptions on A and V", cmd_check_potentials},
      {"scan", "sample Gamma over the scan box into gamma_landscape.csv", cmd_scan},
      {"asymptotics", "boundary decay, small-mu limits and correction bounds", cmd_asymptotics},
      {"solve", "critical points of Gamma and the approximate solutions", cmd_solve},
      {"verify", "run the invariant suite", cmd_verify},
  };
  std::vector<CLI::App*> handles;
  for (const auto& s : subs) handles.push_back(app.add_subcommand(s.name, s.help));
  CLI::App* defaults = app.add_subcommand("defaults", "print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, std::cerr);
    return code == 0 ? 0 : kUsageError;
  }

  if (defaults->parsed()) {
    for (const auto& k : documented_keys()) out << "# " << k.doc << "\n" << k.key << " = " << k.default_value << "\n";
    return kOk;
  }

  RunConfig cfg;
  std::string base_dir = ".";
  try {
    if (!config_path.empty()) {
      cfg = load_config(config_path);
      base_dir = std::filesystem::path(config_path).parent_path().string();
      if (base_dir.empty()) base_dir = ".";
    }
    if (!out_dir.empty()) cfg.output = out_dir;
    if (threads >= 0) cfg.threads = threads;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    validate(cfg);
  } catch (const critmag::ConfigError& e) {
    std::string where = config_path.empty() ? "config" : config_path;
    if (e.line > 0) where += ":" + std::to_string(e.line) + ":" + std::to_string(e.column);
    return usage_error(where + ": " + e.what());
  }
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif

  CommandOptions opt;
  opt.force = force;
  opt.base_dir = base_dir;
  opt.log = quiet ? nullptr : &out;

  for (std::size_t i = 0; i < handles.size(); ++i) {
    if (!handles[i]->parsed()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const RunReport r = subs[i].run(cfg, opt);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!quiet) {
        for (const auto& c : r.checks) out << (c.pass ? "pass  " : "FAIL  ") << c.name << "\n";
        for (const auto& w : r.warnings) out << "warning: " << w << "\n";
        if (!r.diagnostic.empty()) out << r.diagnostic << "\n";
      }
      std::cerr << subs[i].name << ": " << secs << " s, exit " << r.exit_code << "\n";
      return r.exit_code;
    } catch (const critmag::ConfigError& e) {
      return usage_error(e.what());
    } catch (const std::exception& e) {
      std::cerr << "critmag " << subs[i].name << ": " << e.what() << "\n";
      return kCheckFailure;
    }
  }
  return kUsageError;
}

}  // namespace critmag::cli
