#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "critmag_cli/config.hpp"
#include "json.hpp"

namespace critmag::cli {

enum ExitCode : int { kOk = 0, kCheckFailure = 1, kUsageError = 2, kNoSolution = 3 };

struct Check {
  std::string name;
  bool pass = false;
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  std::string detail;
};

struct RunReport {
  std::string command;
  RunConfig config;
  std::vector<Check> checks;
  std::vector<std::string> outputs;  // paths relative to the output directory
  std::vector<std::string> warnings;
  std::string diagnostic;
  int exit_code = kOk;

  bool all_pass() const;
  // Field order is fixed; wall-clock timing is reported on stderr only so
  // that equal configurations give byte-identical reports.
  nlohmann::ordered_json to_json() const;
};

struct CommandOptions {
  bool force = false;
  // Relative table paths in the config resolve against this directory.
  std::string base_dir = ".";
  // Human-readable progress and tables; nullptr silences them.
  std::ostream* log = nullptr;
};

// Every command writes <output>/<command>_report.json next to its artifacts.
RunReport cmd_check_potentials(const RunConfig& c, const CommandOptions& o = {});
RunReport cmd_scan(const RunConfig& c, const CommandOptions& o = {});
RunReport cmd_asymptotics(const RunConfig& c, const CommandOptions& o = {});
RunReport cmd_solve(const RunConfig& c, const CommandOptions& o = {});
RunReport cmd_verify(const RunConfig& c, const CommandOptions& o = {});

// CSV with '\n' line endings and shortest round-trip number formatting.
std::string landscape_csv(const GammaLandscape& L);

// Text dump of u = z + eps phi:
//   header lines "key value...", then one row per harmonic mode
//   "mode degree re(r_1)..re(r_R) im(r_1)..im(r_R)"
// holding the nodal radial profiles of the frame coefficients.
std::string field_dump(const ComplexField& u, double eps, const std::string& kind);

// Write to a sibling temporary file, then rename over path.
void write_atomic(const std::string& path, const std::string& content);

std::string format_number(double v);

}  // namespace critmag::cli
