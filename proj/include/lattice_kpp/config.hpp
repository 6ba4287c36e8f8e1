#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lattice_kpp/dispersion.hpp"
#include "lattice_kpp/model.hpp"
#include "lattice_kpp/simulator.hpp"

namespace lkpp::cli {

inline constexpr std::string_view kVersion = "1.0.0";

struct SweepRange {
  double from = 0.0;
  double to = 0.0;
  std::size_t count = 0;
  bool log_scale = false;
};

struct SweepConfig {
  dispersion::SweepParameter parameter = dispersion::SweepParameter::beta;
  // Explicit grid, or a range expanded at run time. With neither, a beta
  // sweep uses 40 points on [0.02 beta0, 0.98 beta0]; other parameters need one.
  std::vector<double> values;
  std::optional<SweepRange> range;
  std::size_t threads = 0;  // 0: LATTICE_KPP_THREADS, else hardware concurrency
};

struct SimulateConfig {
  Site window_half_width = 400;
  double horizon = 200.0;
  double theta = 0.5;
  double sample_interval = 0.5;
  double fit_fraction = 0.5;
  sim::Scheme scheme = sim::Scheme::rk4;
  Site margin = 20;
  sim::InitialKind initial = sim::InitialKind::compact_block;
  Site support_half_width = 5;
  double amplitude = 1.0;
  // Snapshots from this fraction of the horizon on feed the wave profile.
  double profile_from = 0.75;
  double cell_width = 0.5;
  // trajectory.csv keeps one state every this many time units.
  double trajectory_every = 10.0;
};

struct KernelVerifyConfig {
  std::vector<double> times{0.1, 1.0, 5.0};
  Site center = 0;
  int half_width = 15;
  double tol = 1e-14;
};

struct OptimalBetaConfig {
  // Also evaluate c* at beta1 and report it beside lambda*/mu_bar.
  bool check_speed = true;
};

struct OutputConfig {
  std::string dir = "out";
  bool plot_script = true;
};

struct RunConfig {
  ModelParams model;
  BirthLaw birth;
  dispersion::SpeedOptions speed;
  OptimalBetaConfig optimal_beta;
  SweepConfig sweep;
  SimulateConfig simulate;
  KernelVerifyConfig kernel_verify;
  OutputConfig output;
};

// Strict JSON parsing: unknown keys and wrong types raise ConfigError naming
// the offending key, malformed numbers out of their domain raise
// std::invalid_argument. Missing keys take the defaults above.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Effective configuration with every default filled in, as pretty JSON.
std::string to_json(const RunConfig& config);

// FNV-1a 64-bit hash of the compact canonical form, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace lkpp::cli
