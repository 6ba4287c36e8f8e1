#pragma once

#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lattice_kpp/config.hpp"

namespace lkpp::cli {

enum ExitCode : int {
  kSuccess = 0,
  kNumericalFailure = 1,
  kParseError = 2,
  kRegimeError = 3,
  kContamination = 4,
};

inline constexpr std::string_view kCommands[] = {"speed", "optimal-beta", "sweep", "simulate",
                                                 "kernel-verify"};

// Shortest decimal string that reads back to the same double.
std::string format_number(double x);

// Grid of a sweep after expanding the range or the default beta grid.
std::vector<double> resolve_sweep_grid(const RunConfig& config);

// Runs one command and writes its artifacts into out_dir. Errors propagate as
// exceptions; exit_code_for maps them to the exit-code contract.
int run(const RunConfig& config, std::string_view command, const std::string& out_dir,
        bool quiet, std::ostream& out);

int exit_code_for(const std::exception& error);

// Loads the configuration, runs the command and reports errors on err.
// Returns the process exit code.
int execute(std::string_view command, const std::string& config_path,
            const std::optional<std::string>& out_dir, bool quiet, std::ostream& out,
            std::ostream& err);

}  // namespace lkpp::cli
