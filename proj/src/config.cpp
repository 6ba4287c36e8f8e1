#include "lattice_kpp/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lattice_kpp/errors.hpp"

namespace lkpp::cli {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

// Reads keys of one JSON object and rejects any key it was not asked about.
class ObjectReader {
public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError("'" + label() + "' must be an object");
  }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError("key '" + name(key) + "' must be a number");
      out = v->get<double>();
    }
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError("key '" + name(key) + "' must be an integer");
      if (v->is_number_unsigned()) {
        out = static_cast<Int>(v->get<std::uint64_t>());
      } else {
        const auto raw = v->get<std::int64_t>();
        if (std::is_unsigned_v<Int> && raw < 0) {
          throw ConfigError("key '" + name(key) + "' must be nonnegative");
        }
        out = static_cast<Int>(raw);
      }
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError("key '" + name(key) + "' must be true or false");
      out = v->get<bool>();
    }
  }

  std::optional<std::string> string(const char* key) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError("key '" + name(key) + "' must be a string");
      return v->get<std::string>();
    }
    return std::nullopt;
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError("key '" + name(key) + "' must be an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) throw ConfigError("key '" + name(key) + "' must be an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }

  const json* object(const char* key) { return take(key); }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  // Throws on the first key that was never requested.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + name(it.key().c_str()) + "'");
    }
  }

private:
  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end() || it->is_null()) return nullptr;
    return &*it;
  }
  std::string label() const { return path_.empty() ? "configuration" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Parse>
auto parse_enum(const std::string& key, const std::string& value, Parse parse) {
  try {
    return parse(value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void validate(const RunConfig& c) {
  c.model.validate();
  c.birth.validate();
  const auto& s = c.speed;
  require(s.mu_min > 0.0 && s.mu_max > s.mu_min, "speed: need 0 < mu_min < mu_max");
  require(s.grid_points >= 3, "speed: grid_points must be >= 3");
  require(s.golden_width > 0.0, "speed: golden_width must be > 0");

  if (c.sweep.range) {
    const auto& r = *c.sweep.range;
    require(r.count >= 2, "sweep.range: count must be >= 2");
    require(r.to > r.from, "sweep.range: need from < to");
    require(!r.log_scale || r.from > 0.0, "sweep.range: log scale needs from > 0");
  }
  require(c.sweep.values.empty() || !c.sweep.range, "sweep: give either values or range, not both");

  const auto& m = c.simulate;
  require(m.window_half_width >= 2, "simulate: window_half_width must be >= 2");
  require(m.support_half_width >= 0 && m.support_half_width <= m.window_half_width,
          "simulate: support_half_width must lie in [0, window_half_width]");
  require(m.horizon > 0.0, "simulate: horizon must be > 0");
  require(m.theta > 0.0 && m.theta < 1.0, "simulate: theta must lie in (0, 1)");
  require(m.sample_interval > 0.0, "simulate: sample_interval must be > 0");
  require(m.fit_fraction > 0.0 && m.fit_fraction <= 1.0, "simulate: fit_fraction must lie in (0, 1]");
  require(m.margin >= 0, "simulate: margin must be >= 0");
  require(m.amplitude >= 0.0 && m.amplitude <= 1.0, "simulate: amplitude must lie in [0, 1]");
  require(m.profile_from >= 0.0 && m.profile_from < 1.0, "simulate: profile_from must lie in [0, 1)");
  require(m.cell_width > 0.0, "simulate: cell_width must be > 0");
  require(m.trajectory_every > 0.0, "simulate: trajectory_every must be > 0");

  const auto& k = c.kernel_verify;
  require(!k.times.empty(), "kernel_verify: times must not be empty");
  for (double t : k.times) require(t > 0.0 && std::isfinite(t), "kernel_verify: times must be > 0");
  require(k.half_width >= 1, "kernel_verify: half_width must be >= 1");
  require(k.tol > 0.0, "kernel_verify: tol must be > 0");
  require(!c.output.dir.empty(), "output: dir must not be empty");
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }

  RunConfig c;
  ObjectReader top(root, "");
  top.number("alpha", c.model.alpha);
  top.number("beta", c.model.beta);
  top.number("gamma", c.model.gamma);
  top.number("eta", c.model.eta);
  top.number("tau", c.model.tau);

  if (const json* b = top.object("birth")) {
    ObjectReader r(*b, "birth");
    if (auto kind = r.string("kind")) c.birth.kind = parse_enum("birth.kind", *kind, parse_birth_kind);
    r.number("p", c.birth.p);
    r.number("q", c.birth.q);
    r.number("survival", c.birth.survival);
    r.finish();
  }

  if (const json* s = top.object("speed")) {
    ObjectReader r(*s, "speed");
    r.number("mu_min", c.speed.mu_min);
    r.number("mu_max", c.speed.mu_max);
    r.integer("grid_points", c.speed.grid_points);
    r.number("golden_width", c.speed.golden_width);
    r.finish();
  }

  if (const json* o = top.object("optimal_beta")) {
    ObjectReader r(*o, "optimal_beta");
    r.boolean("check_speed", c.optimal_beta.check_speed);
    r.finish();
  }

  if (const json* s = top.object("sweep")) {
    ObjectReader r(*s, "sweep");
    if (auto p = r.string("parameter")) {
      c.sweep.parameter = parse_enum("sweep.parameter", *p, dispersion::parse_sweep_parameter);
    }
    r.numbers("values", c.sweep.values);
    if (const json* g = r.object("range")) {
      ObjectReader rr(*g, "sweep.range");
      SweepRange range;
      rr.number("from", range.from);
      rr.number("to", range.to);
      rr.integer("count", range.count);
      if (auto scale = rr.string("scale")) {
        if (*scale == "log") {
          range.log_scale = true;
        } else if (*scale != "linear") {
          throw ConfigError("key 'sweep.range.scale' must be \"linear\" or \"log\"");
        }
      }
      rr.finish();
      c.sweep.range = range;
    }
    r.integer("threads", c.sweep.threads);
    r.finish();
  }

  if (const json* s = top.object("simulate")) {
    ObjectReader r(*s, "simulate");
    auto& m = c.simulate;
    r.integer("window_half_width", m.window_half_width);
    r.number("horizon", m.horizon);
    r.number("theta", m.theta);
    r.number("sample_interval", m.sample_interval);
    r.number("fit_fraction", m.fit_fraction);
    if (auto scheme = r.string("scheme")) m.scheme = parse_enum("simulate.scheme", *scheme, sim::parse_scheme);
    r.integer("margin", m.margin);
    if (const json* init = r.object("initial")) {
      ObjectReader ri(*init, "simulate.initial");
      if (auto kind = ri.string("kind")) {
        m.initial = parse_enum("simulate.initial.kind", *kind, sim::parse_initial_kind);
      }
      ri.integer("support_half_width", m.support_half_width);
      ri.number("amplitude", m.amplitude);
      ri.finish();
    }
    r.number("profile_from", m.profile_from);
    r.number("cell_width", m.cell_width);
    r.number("trajectory_every", m.trajectory_every);
    r.finish();
  }

  if (const json* k = top.object("kernel_verify")) {
    ObjectReader r(*k, "kernel_verify");
    r.numbers("times", c.kernel_verify.times);
    r.integer("center", c.kernel_verify.center);
    r.integer("half_width", c.kernel_verify.half_width);
    r.number("tol", c.kernel_verify.tol);
    r.finish();
  }

  if (const json* o = top.object("output")) {
    ObjectReader r(*o, "output");
    if (auto dir = r.string("dir")) c.output.dir = *dir;
    r.boolean("plot_script", c.output.plot_script);
    r.finish();
  }

  top.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

namespace {

ordered to_ordered(const RunConfig& c) {
  ordered j;
  j["alpha"] = c.model.alpha;
  j["beta"] = c.model.beta;
  j["gamma"] = c.model.gamma;
  j["eta"] = c.model.eta;
  j["tau"] = c.model.tau;
  j["birth"] = {{"kind", to_string(c.birth.kind)},
                {"p", c.birth.p},
                {"q", c.birth.q},
                {"survival", c.birth.survival}};
  j["speed"] = {{"mu_min", c.speed.mu_min},
                {"mu_max", c.speed.mu_max},
                {"grid_points", c.speed.grid_points},
                {"golden_width", c.speed.golden_width}};
  j["optimal_beta"] = {{"check_speed", c.optimal_beta.check_speed}};
  ordered sweep;
  sweep["parameter"] = dispersion::to_string(c.sweep.parameter);
  if (c.sweep.range) {
    sweep["range"] = {{"from", c.sweep.range->from},
                      {"to", c.sweep.range->to},
                      {"count", c.sweep.range->count},
                      {"scale", c.sweep.range->log_scale ? "log" : "linear"}};
  } else {
    sweep["values"] = c.sweep.values;
  }
  sweep["threads"] = c.sweep.threads;
  j["sweep"] = sweep;
  const auto& m = c.simulate;
  j["simulate"] = {{"window_half_width", m.window_half_width},
                   {"horizon", m.horizon},
                   {"theta", m.theta},
                   {"sample_interval", m.sample_interval},
                   {"fit_fraction", m.fit_fraction},
                   {"scheme", sim::to_string(m.scheme)},
                   {"margin", m.margin},
                   {"initial",
                    {{"kind", sim::to_string(m.initial)},
                     {"support_half_width", m.support_half_width},
                     {"amplitude", m.amplitude}}},
                   {"profile_from", m.profile_from},
                   {"cell_width", m.cell_width},
                   {"trajectory_every", m.trajectory_every}};
  j["kernel_verify"] = {{"times", c.kernel_verify.times},
                        {"center", c.kernel_verify.center},
                        {"half_width", c.kernel_verify.half_width},
                        {"tol", c.kernel_verify.tol}};
  j["output"] = {{"dir", c.output.dir}, {"plot_script", c.output.plot_script}};
  return j;
}

}  // namespace

std::string to_json(const RunConfig& config) { return to_ordered(config).dump(2) + "\n"; }

std::string config_hash(const RunConfig& config) {
  // The output directory does not change results, so it stays out of the hash.
  ordered j = to_ordered(config);
  j.erase("output");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lkpp::cli
