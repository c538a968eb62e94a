#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdest/adapt.hpp"
#include "rdest/estimator.hpp"
#include "rdest/verification.hpp"

namespace rdest {

/// Invalid command line or configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitUsage = 2 };

struct RunConfig {
  std::string command;  // solve | estimate | adapt | study | verify
  /// Mesh file; a criss-cross grid of the unit square when absent.
  std::optional<std::filesystem::path> mesh;
  int grid = 4;
  std::string preset = "sinsin";
  std::vector<double> kappas{1.0};
  double theta_mark = 0.5;
  int max_dof = 10000;
  int quad_degree = 8;
  int dual_depth = 2;
  int oscillation_every = 1;
  double tol = 1e-10;
  std::filesystem::path out = ".";
  std::uint64_t seed = 1;
  int threads = 0;
};

/// Throws ConfigError naming the first invalid field.
void validate(const RunConfig& config);

/// Parses argv (with an optional --config key=value file; flags win).
/// Returns the exit code when parsing ends the program (help, errors).
struct ParseResult {
  std::optional<RunConfig> config;
  int exit_code = kExitOk;
};
[[nodiscard]] ParseResult parse_command_line(int argc, const char* const* argv, std::ostream& out,
                                             std::ostream& err);

/// Runs one command and writes its artifacts into config.out.
[[nodiscard]] int run(const RunConfig& config, std::ostream& log, std::ostream& err);

/// parse_command_line followed by run.
[[nodiscard]] int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

void write_solution_csv(const std::filesystem::path& path, const Mesh& mesh, const DiscreteFunction& u);
void write_indicator_csv(const std::filesystem::path& path, const Mesh& mesh, const IndicatorReport& report);
void write_run_report_csv(const std::filesystem::path& path, const RunReport& report);
void write_study_csv(const std::filesystem::path& path, const StudyReport& report);

}  // namespace rdest
