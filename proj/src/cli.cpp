#include "lattice_kpp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "lattice_kpp/dispersion.hpp"
#include "lattice_kpp/errors.hpp"
#include "lattice_kpp/kernel_suite.hpp"
#include "lattice_kpp/simulator.hpp"

namespace lkpp::cli {

namespace fs = std::filesystem;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

class CsvFile {
public:
  CsvFile(const fs::path& path, const std::string& provenance, const std::string& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    out_ << provenance << '\n' << header << '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

private:
  static std::string cell(double x) { return format_number(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  template <class Int, class = std::enable_if_t<std::is_integral_v<Int>>>
  static std::string cell(Int v) { return std::to_string(v); }

  std::ofstream out_;
};

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  std::string provenance;
  bool quiet;
  std::ostream& out;

  void say(std::string_view key, double value) const {
    if (!quiet) out << key << " = " << format_number(value) << '\n';
  }
  void say(std::string_view key, std::string_view value) const {
    if (!quiet) out << key << " = " << value << '\n';
  }
};

std::size_t sweep_threads(std::size_t configured) {
  std::size_t threads = configured;
  if (const char* env = std::getenv("LATTICE_KPP_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) {
      throw ConfigError("LATTICE_KPP_THREADS must be a positive integer");
    }
    const auto c = static_cast<std::size_t>(cap);
    threads = threads == 0 ? c : std::min(threads, c);
  }
  return threads;
}

int cmd_speed(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto r = dispersion::spreading_speed(c.model.beta, c.model, c.birth, c.speed);
  const double b0 = beta0(c.model, c.birth);
  ctx.say("beta", c.model.beta);
  ctx.say("beta0", b0);
  ctx.say("c_star", r.c_star);
  ctx.say("mu_star", r.mu_star);
  ctx.say("lambda_at_mu_star", r.lambda_star_at_min);
  ctx.say("residual_F", r.residual_F);
  ctx.say("residual_stationarity", r.residual_stationarity);
  if (r.multiple_minima) ctx.say("warning", "several local minima of lambda(mu)/mu");
  CsvFile csv(ctx.dir / "speed.csv", ctx.provenance,
              "beta,c_star,mu_star,lambda_at_mu_star,residual_F,residual_stationarity,beta0,multiple_minima");
  csv.row(c.model.beta, r.c_star, r.mu_star, r.lambda_star_at_min, r.residual_F,
          r.residual_stationarity, b0, r.multiple_minima ? 1 : 0);
  return kSuccess;
}

int cmd_optimal_beta(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto o = dispersion::optimal_beta(c.model, c.birth);
  ctx.say("beta1", o.beta1);
  ctx.say("beta0", o.beta0);
  ctx.say("lambda_star", o.lambda_star);
  ctx.say("mu_bar", o.mu_bar);
  ctx.say("c_max", o.c_max);
  ctx.say("residual_G", o.residual_G);
  double at_beta1 = std::numeric_limits<double>::quiet_NaN();
  if (c.optimal_beta.check_speed) {
    at_beta1 = dispersion::spreading_speed(o.beta1, c.model, c.birth, c.speed).c_star;
    ctx.say("c_star_at_beta1", at_beta1);
  }
  CsvFile csv(ctx.dir / "optimal.csv", ctx.provenance,
              "beta1,beta0,lambda_star,mu_bar,c_max,residual_G,c_star_at_beta1");
  csv.row(o.beta1, o.beta0, o.lambda_star, o.mu_bar, o.c_max, o.residual_G, at_beta1);
  return kSuccess;
}

void write_sweep_plot(const Context& ctx, std::string_view parameter, bool log_x) {
  std::ofstream gp(ctx.dir / "sweep.gp", std::ios::binary);
  gp << ctx.provenance << '\n'
     << "set datafile separator ','\n"
     << "set terminal pngcairo size 800,600\n"
     << "set output 'sweep.png'\n"
     << "set xlabel '" << parameter << "'\n"
     << "set ylabel 'spreading speed c*'\n"
     << (log_x ? "set logscale x\n" : "")
     << "set key off\n"
     << "plot 'sweep.csv' skip 2 using 1:2 with linespoints pt 7\n";
}

int cmd_sweep(const Context& ctx, const std::vector<double>& grid) {
  const auto& c = ctx.cfg;
  const auto table = dispersion::sweep(c.sweep.parameter, grid, c.model, c.birth,
                                       sweep_threads(c.sweep.threads), c.speed);
  const auto name = dispersion::to_string(table.parameter);
  CsvFile csv(ctx.dir / "sweep.csv", ctx.provenance,
              std::string(name) + ",c_star,mu_star,regime");
  std::size_t ok = 0;
  for (const auto& row : table.rows) {
    const bool kpp = row.regime == dispersion::Regime::kpp_ok;
    ok += kpp ? 1 : 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    csv.row(row.value, kpp ? row.c_star : nan, kpp ? row.mu_star : nan,
            dispersion::to_string(row.regime));
  }
  if (c.output.plot_script) write_sweep_plot(ctx, name, c.sweep.range && c.sweep.range->log_scale);
  ctx.say("parameter", name);
  ctx.say("points", static_cast<double>(table.rows.size()));
  ctx.say("points_in_regime", static_cast<double>(ok));
  return kSuccess;
}

bool near_multiple(double t, double every) {
  const double k = std::round(t / every);
  return std::abs(t - k * every) <= 1e-9 * std::max(1.0, every);
}

int cmd_simulate(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto& s = c.simulate;
  const auto speed = dispersion::spreading_speed(c.model.beta, c.model, c.birth, c.speed);

  const auto plan = sim::choose_step(c.model, c.birth, s.sample_interval);
  sim::InitialData init;
  init.kind = s.initial;
  init.window = {-s.window_half_width, s.window_half_width};
  init.support = {-s.support_half_width, s.support_half_width};
  init.amplitude = s.amplitude;
  auto history = sim::make_initial(init, c.model, c.birth, plan);

  sim::IntegrateOptions opt;
  opt.scheme = s.scheme;
  opt.sample_interval = s.sample_interval;
  opt.theta = s.theta;
  opt.margin = s.margin;
  const auto traj = sim::integrate(history, s.horizon, c.model, c.birth, opt);
  const double w_star = traj.reference.w_star;

  {
    CsvFile csv(ctx.dir / "trajectory.csv", ctx.provenance, "time,site,u");
    for (const auto& snap : traj.snapshots) {
      if (!near_multiple(snap.time, s.trajectory_every) && snap.time != traj.final_state.time) continue;
      for (Site i = snap.window().lo; i <= snap.window().hi; ++i) csv.row(snap.time, i, snap.values[i]);
    }
  }
  {
    CsvFile csv(ctx.dir / "front.csv", ctx.provenance, "time,position");
    for (std::size_t k = 0; k < traj.front.times.size(); ++k) {
      csv.row(traj.front.times[k], traj.front.positions[k]);
    }
  }

  const auto fit = sim::empirical_speed(traj.front, s.fit_fraction);
  std::vector<sim::LatticeState> late;
  std::vector<double> times;
  for (const auto& snap : traj.snapshots) {
    if (snap.time >= s.profile_from * s.horizon - 1e-9) {
      late.push_back(snap);
      times.push_back(snap.time);
    }
  }
  sim::ProfileOptions popt;
  popt.cell_width = s.cell_width;
  const auto profile = sim::wave_profile(late, fit.speed, times, popt);
  {
    CsvFile csv(ctx.dir / "profile.csv", ctx.provenance, "parity,xi,mean,envelope,count");
    for (int parity = 0; parity < 2; ++parity) {
      for (const auto& cell : profile.cells[static_cast<std::size_t>(parity)]) {
        csv.row(parity == 0 ? "even" : "odd", cell.xi, cell.mean, cell.envelope, cell.count);
      }
    }
  }

  const double rel = (fit.speed - speed.c_star) / speed.c_star;
  CsvFile csv(ctx.dir / "comparison.csv", ctx.provenance, "quantity,value");
  const std::pair<const char*, double> rows[] = {
      {"c_star", speed.c_star},
      {"mu_star", speed.mu_star},
      {"c_empirical", fit.speed},
      {"standard_error", fit.standard_error},
      {"relative_error", rel},
      {"fit_samples", static_cast<double>(fit.samples)},
      {"dt", traj.dt},
      {"w_star", w_star},
      {"v_star", traj.reference.v_star},
      {"periodicity_defect", profile.periodicity_defect},
      {"periodicity_defect_over_w_star", profile.periodicity_defect / w_star},
      {"left_limit_even", profile.left_limit[0]},
      {"left_limit_odd", profile.left_limit[1]},
      {"right_limit_even", profile.right_limit[0]},
      {"right_limit_odd", profile.right_limit[1]},
  };
  for (const auto& [name, value] : rows) {
    csv.row(name, value);
    ctx.say(name, value);
  }
  return kSuccess;
}

int cmd_kernel_verify(const Context& ctx) {
  const auto& k = ctx.cfg.kernel_verify;
  kernel::KernelSuiteOptions opt;
  opt.times = k.times;
  opt.center = k.center;
  opt.half_width = k.half_width;
  opt.tol = k.tol;
  const auto checks = kernel::verify_kernel(ctx.cfg.model, opt);
  CsvFile csv(ctx.dir / "kernel_report.csv", ctx.provenance, "t,check,value,limit,status");
  int failures = 0;
  for (const auto& c : checks) {
    const char* status = c.informational ? "INFO" : (c.passed ? "PASS" : "FAIL");
    failures += (!c.informational && !c.passed) ? 1 : 0;
    csv.row(c.t, c.name, c.value, c.limit, status);
    if (!ctx.quiet) {
      ctx.out << status << " t=" << format_number(c.t) << ' ' << c.name << " = "
              << format_number(c.value) << " (limit " << format_number(c.limit) << ")\n";
    }
  }
  ctx.say("failures", static_cast<double>(failures));
  return failures == 0 ? kSuccess : kNumericalFailure;
}

}  // namespace

std::vector<double> resolve_sweep_grid(const RunConfig& c) {
  if (!c.sweep.values.empty()) return c.sweep.values;
  SweepRange r;
  if (c.sweep.range) {
    r = *c.sweep.range;
  } else if (c.sweep.parameter == dispersion::SweepParameter::beta) {
    const double b0 = beta0(c.model, c.birth);
    r = {0.02 * b0, 0.98 * b0, 40, false};
  } else {
    throw ConfigError("sweep over '" + std::string(dispersion::to_string(c.sweep.parameter)) +
                      "' needs 'sweep.values' or 'sweep.range'");
  }
  std::vector<double> grid(r.count);
  for (std::size_t k = 0; k < r.count; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(r.count - 1);
    grid[k] = r.log_scale ? std::exp(std::log(r.from) + s * (std::log(r.to) - std::log(r.from)))
                          : r.from + s * (r.to - r.from);
  }
  grid.front() = r.from;
  grid.back() = r.to;
  return grid;
}

int run(const RunConfig& config, std::string_view command, const std::string& out_dir, bool quiet,
        std::ostream& out) {
  if (std::find(std::begin(kCommands), std::end(kCommands), command) == std::end(kCommands)) {
    throw ConfigError("unknown command '" + std::string(command) + "'");
  }
  RunConfig effective = config;
  effective.output.dir = out_dir;
  std::vector<double> grid;
  if (command == "sweep") {
    grid = resolve_sweep_grid(effective);
    if (!effective.sweep.range) effective.sweep.values = grid;
  }

  fs::create_directories(out_dir);
  {
    std::ofstream cfg(fs::path(out_dir) / "config.effective.json", std::ios::binary);
    cfg << to_json(effective);
  }
  const Context ctx{effective, fs::path(out_dir),
                    "# lattice-kpp " + std::string(kVersion) + " config=" + config_hash(effective) +
                        " command=" + std::string(command),
                    quiet, out};
  if (command == "speed") return cmd_speed(ctx);
  if (command == "optimal-beta") return cmd_optimal_beta(ctx);
  if (command == "sweep") return cmd_sweep(ctx, grid);
  if (command == "simulate") return cmd_simulate(ctx);
  return cmd_kernel_verify(ctx);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ContaminationError*>(&e)) return kContamination;
  if (dynamic_cast<const ConfigError*>(&e)) return kParseError;
  if (dynamic_cast<const RegimeError*>(&e)) return kRegimeError;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kRegimeError;
  return kNumericalFailure;
}

int execute(std::string_view command, const std::string& config_path,
            const std::optional<std::string>& out_dir, bool quiet, std::ostream& out,
            std::ostream& err) {
  try {
    const RunConfig cfg = load_config(config_path);
    return run(cfg, command, out_dir.value_or(cfg.output.dir), quiet, out);
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << "lattice-kpp: error: " << e.what() << '\n';
    return code;
  }
}

}  // namespace lkpp::cli
