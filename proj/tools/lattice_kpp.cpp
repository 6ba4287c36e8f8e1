#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "lattice_kpp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spreading speeds and fronts of a 2-periodic lattice population model",
               "lattice-kpp"};
  app.set_version_flag("--version", std::string(lkpp::cli::kVersion));
  app.require_subcommand(1, 1);

  std::string config;
  std::optional<std::string> out_dir;
  bool quiet = false;
  const std::pair<std::string_view, const char*> commands[] = {
      {"speed", "Spreading speed c* and its minimiser mu* at the configured beta"},
      {"optimal-beta", "Dispersal rate beta1 that maximises c*"},
      {"sweep", "c* over a grid of beta, eta or f'(0)"},
      {"simulate", "Integrate the lattice model and compare the front with c*"},
      {"kernel-verify", "Numerical checks of the dispersal heat kernel"},
  };
  static_assert(std::size(commands) == std::size(lkpp::cli::kCommands));
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(std::string(name), help);
    sub->add_option("--config", config, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_flag("--quiet", quiet, "Suppress the summary on stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lkpp::cli::kParseError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return lkpp::cli::execute(command, config, out_dir, quiet, std::cout, std::cerr);
}
