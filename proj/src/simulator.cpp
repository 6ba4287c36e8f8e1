#include "lattice_kpp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lattice_kpp/errors.hpp"

namespace lkpp::sim {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

// d/dt u_i = (A + B)u_i + [i even] f(delayed_i), zero outside the window.
// Writes into out (same size as u).
void rhs(std::span<const double> u, std::span<const double> delayed, Site first,
         const ModelParams& p, const BirthLaw& f, std::span<double> out) {
  const std::size_t n = u.size();
  const double even_loss = 2.0 * p.beta + p.gamma;
  const double odd_loss = 2.0 * p.alpha + p.eta;
  for (std::size_t k = 0; k < n; ++k) {
    const double left = k > 0 ? u[k - 1] : 0.0;
    const double right = k + 1 < n ? u[k + 1] : 0.0;
    const Site i = first + static_cast<Site>(k);
    if (is_even(i)) {
      out[k] = p.alpha * (left + right) - even_loss * u[k] + f(delayed[k]);
    } else {
      out[k] = p.beta * (left + right) - odd_loss * u[k];
    }
  }
}

}  // namespace

StepPlan choose_step(const ModelParams& p, const BirthLaw& f, double sample_interval) {
  p.validate();
  const double cap = 0.1 / (2.0 * std::max(p.alpha, p.beta) + std::max(p.gamma, p.eta) +
                            f.slope_at_zero());
  StepPlan plan;
  if (p.tau > 0.0) {
    plan.delay_steps = static_cast<int>(std::ceil(p.tau / cap - 1e-12));
    plan.delay_steps = std::max(plan.delay_steps, 1);
    plan.dt = p.tau / plan.delay_steps;
  } else if (sample_interval > 0.0) {
    const double per_sample = std::ceil(sample_interval / cap - 1e-12);
    plan.dt = sample_interval / std::max(per_sample, 1.0);
  } else {
    plan.dt = cap;
  }
  return plan;
}

HistoryBuffer::HistoryBuffer(StepPlan plan, LatticeState initial) : plan_(plan) {
  if (!(plan.dt > 0.0) || plan.delay_steps < 0) {
    throw std::invalid_argument("HistoryBuffer: invalid step plan");
  }
  if (initial.values.size() < 5) {
    throw std::invalid_argument("HistoryBuffer: window must hold at least 5 sites");
  }
  // Constant history on [-tau, 0].
  for (int k = plan.delay_steps; k >= 0; --k) {
    LatticeState frame = initial;
    frame.time = initial.time - k * plan.dt;
    frames_.push_back(std::move(frame));
  }
}

const LatticeState& HistoryBuffer::frame_back(int back) const {
  if (back < 0 || back > plan_.delay_steps) {
    throw std::out_of_range("HistoryBuffer::frame_back: outside the delay window");
  }
  return frames_[frames_.size() - 1 - static_cast<std::size_t>(back)];
}

void HistoryBuffer::push(LatticeState next) {
  if (!(next.values.range() == window())) {
    throw std::invalid_argument("HistoryBuffer::push: window mismatch");
  }
  frames_.push_back(std::move(next));
  while (frames_.size() > static_cast<std::size_t>(plan_.delay_steps) + 1) frames_.pop_front();
}

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::compact_block: return "compact_block";
    case InitialKind::equilibrium: return "equilibrium";
    case InitialKind::zero: return "zero";
  }
  return "?";
}

InitialKind parse_initial_kind(std::string_view name) {
  if (name == "compact_block") return InitialKind::compact_block;
  if (name == "equilibrium") return InitialKind::equilibrium;
  if (name == "zero") return InitialKind::zero;
  throw std::invalid_argument("unknown initial data kind '" + std::string(name) + "'");
}

HistoryBuffer make_initial(const InitialData& data, const ModelParams& p, const BirthLaw& f,
                           StepPlan plan) {
  if (data.window.size() < 5) throw std::invalid_argument("make_initial: window shorter than 5");
  if (!(data.amplitude >= 0.0 && data.amplitude <= 1.0)) {
    throw std::invalid_argument("make_initial: amplitude must lie in [0, 1]");
  }
  LatticeState state{0.0, SiteVector(data.window)};
  switch (data.kind) {
    case InitialKind::zero:
      break;
    case InitialKind::equilibrium: {
      const SteadyState ss = steady_state(p, f);
      for (Site i = data.window.lo; i <= data.window.hi; ++i) state.values[i] = ss.at(i);
      break;
    }
    case InitialKind::compact_block: {
      if (!data.window.contains(data.support)) {
        throw std::invalid_argument("make_initial: support outside window");
      }
      const SteadyState ss = steady_state(p, f);
      for (Site i = data.support.lo; i <= data.support.hi; ++i) {
        state.values[i] = data.amplitude * ss.at(i);
      }
      break;
    }
  }
  return HistoryBuffer(plan, std::move(state));
}

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::rk4 ? "rk4" : "euler";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "rk4") return Scheme::rk4;
  if (name == "euler") return Scheme::euler;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::optional<double> front_position(const LatticeState& state, double theta,
                                     const SteadyState& ref) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("front_position: theta");
  const SiteRange& w = state.window();
  const double level = theta * ref.w_star;
  Site last_even = is_even(w.hi) ? w.hi : w.hi - 1;
  for (Site i = last_even; i >= w.lo; i -= 2) {
    const double ui = state.values[i];
    if (ui < level) continue;
    if (i == last_even) return static_cast<double>(i);
    const double next = state.values[i + 2];
    return static_cast<double>(i) + 2.0 * (ui - level) / (ui - next);
  }
  return std::nullopt;
}

std::optional<double> left_front_position(const LatticeState& state, double theta,
                                          const SteadyState& ref) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("front_position: theta");
  const SiteRange& w = state.window();
  const double level = theta * ref.w_star;
  Site first_even = is_even(w.lo) ? w.lo : w.lo + 1;
  for (Site i = first_even; i <= w.hi; i += 2) {
    const double ui = state.values[i];
    if (ui < level) continue;
    if (i == first_even) return static_cast<double>(i);
    const double prev = state.values[i - 2];
    return static_cast<double>(i) - 2.0 * (ui - level) / (ui - prev);
  }
  return std::nullopt;
}

Trajectory integrate(HistoryBuffer& history, double horizon, const ModelParams& p,
                     const BirthLaw& f, const IntegrateOptions& opt) {
  p.validate();
  if (!(opt.sample_interval > 0.0)) throw std::invalid_argument("integrate: sample_interval");
  const StepPlan& plan = history.plan();
  if (p.tau > 0.0) {
    const double expected = p.tau / plan.delay_steps;
    if (plan.delay_steps < 1 || std::abs(plan.dt - expected) > 1e-14 * expected) {
      throw std::invalid_argument("integrate: dt must divide tau");
    }
  }

  Trajectory traj;
  traj.dt = plan.dt;
  traj.front.level = opt.theta;
  traj.reference = opt.reference ? *opt.reference : steady_state(p, f);
  const SteadyState& ref = traj.reference;

  const SiteRange window = history.window();
  const std::size_t n = window.size();
  const double eps = 1e-9 * ref.w_star;
  const double t0 = history.time();
  const auto total_steps = static_cast<long long>(std::llround((horizon - t0) / plan.dt));
  if (total_steps < 0) throw std::invalid_argument("integrate: horizon before current time");

  std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n), mid_delay(n);

  auto check_state = [&](const LatticeState& s) {
    const auto v = s.values.values();
    for (std::size_t k = 0; k < n; ++k) {
      const Site i = window.lo + static_cast<Site>(k);
      if (!std::isfinite(v[k]) ||
          (opt.check_instability && v[k] > opt.instability_factor * ref.w_star)) {
        throw InstabilityError("integrate: instability at site " + std::to_string(i) +
                               ", t = " + fmt(s.time) + ", u = " + fmt(v[k]));
      }
      if (opt.check_invariant_region && (v[k] < -eps || v[k] > ref.at(i) + eps)) {
        throw InstabilityError("integrate: state left [0, U*] at site " + std::to_string(i) +
                               ", t = " + fmt(s.time) + ", u = " + fmt(v[k]));
      }
    }
  };

  auto record = [&](const LatticeState& s) {
    const auto right = front_position(s, opt.theta, ref);
    const auto left = left_front_position(s, opt.theta, ref);
    const bool hit = (right && *right >= static_cast<double>(window.hi - opt.margin)) ||
                     (left && *left <= static_cast<double>(window.lo + opt.margin));
    if (hit) {
      if (opt.check_contamination) {
        throw ContaminationError("integrate: front within " + std::to_string(opt.margin) +
                                 " sites of the window edge at t = " + fmt(s.time));
      }
      if (!traj.front.boundary_hit_time) traj.front.boundary_hit_time = s.time;
    }
    if (right) {
      traj.front.times.push_back(s.time);
      traj.front.positions.push_back(*right);
    }
    if (opt.keep_snapshots && s.time >= opt.keep_from - 1e-12) traj.snapshots.push_back(s);
  };

  check_state(history.current());
  record(history.current());
  double next_sample = t0 + opt.sample_interval;
  const bool delayed = p.tau > 0.0;

  for (long long step = 1; step <= total_steps; ++step) {
    const LatticeState& cur = history.current();
    const auto u = cur.values.values();
    const Site first = window.lo;

    // Delayed values for the stage times t, t + dt/2 and t + dt: the stored
    // frames at t - tau and t - tau + dt, and their average at the midpoint.
    std::span<const double> d_start = u;
    std::span<const double> d_end = u;
    if (delayed) {
      d_start = history.frame_back(plan.delay_steps).values.values();
      d_end = history.frame_back(plan.delay_steps - 1).values.values();
      for (std::size_t k = 0; k < n; ++k) mid_delay[k] = 0.5 * (d_start[k] + d_end[k]);
    }

    LatticeState next{t0 + static_cast<double>(step) * plan.dt, SiteVector(window)};
    auto out = next.values.values();
    const double dt = plan.dt;

    if (opt.scheme == Scheme::euler) {
      rhs(u, d_start, first, p, f, k1);
      for (std::size_t k = 0; k < n; ++k) out[k] = u[k] + dt * k1[k];
    } else {
      rhs(u, delayed ? d_start : u, first, p, f, k1);
      for (std::size_t k = 0; k < n; ++k) stage[k] = u[k] + 0.5 * dt * k1[k];
      rhs(stage, delayed ? std::span<const double>(mid_delay) : stage, first, p, f, k2);
      for (std::size_t k = 0; k < n; ++k) stage[k] = u[k] + 0.5 * dt * k2[k];
      rhs(stage, delayed ? std::span<const double>(mid_delay) : stage, first, p, f, k3);
      for (std::size_t k = 0; k < n; ++k) stage[k] = u[k] + dt * k3[k];
      rhs(stage, delayed ? d_end : stage, first, p, f, k4);
      for (std::size_t k = 0; k < n; ++k) {
        out[k] = u[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      }
    }

    check_state(next);
    const bool sample = next.time >= next_sample - 1e-9 * plan.dt || step == total_steps;
    if (sample) {
      record(next);
      while (next_sample <= next.time + 1e-9 * plan.dt) next_sample += opt.sample_interval;
    }
    history.push(std::move(next));
  }
  traj.final_state = history.current();
  return traj;
}

SpeedFit empirical_speed(const FrontTrace& trace, double fit_fraction) {
  if (!(fit_fraction > 0.0 && fit_fraction <= 1.0)) {
    throw std::invalid_argument("empirical_speed: fit_fraction must lie in (0, 1]");
  }
  if (trace.times.size() != trace.positions.size()) {
    throw std::invalid_argument("empirical_speed: ragged trace");
  }
  const std::size_t total = trace.times.size();
  const auto count = static_cast<std::size_t>(std::floor(fit_fraction * static_cast<double>(total)));
  if (count < 10) {
    throw std::invalid_argument("empirical_speed: fewer than 10 samples in the fit window (" +
                                std::to_string(count) + ")");
  }
  const std::size_t start = total - count;
  if (trace.boundary_hit_time && *trace.boundary_hit_time <= trace.times.back()) {
    throw ContaminationError("empirical_speed: front reached the boundary margin at t = " +
                             fmt(*trace.boundary_hit_time));
  }

  double mean_t = 0.0;
  double mean_x = 0.0;
  for (std::size_t k = start; k < total; ++k) {
    mean_t += trace.times[k];
    mean_x += trace.positions[k];
  }
  mean_t /= static_cast<double>(count);
  mean_x /= static_cast<double>(count);
  double stt = 0.0;
  double stx = 0.0;
  for (std::size_t k = start; k < total; ++k) {
    const double dt = trace.times[k] - mean_t;
    stt += dt * dt;
    stx += dt * (trace.positions[k] - mean_x);
  }
  if (!(stt > 0.0)) throw std::invalid_argument("empirical_speed: degenerate sample times");

  SpeedFit fit;
  fit.samples = count;
  fit.speed = stx / stt;
  fit.intercept = mean_x - fit.speed * mean_t;
  double ssr = 0.0;
  for (std::size_t k = start; k < total; ++k) {
    const double r = trace.positions[k] - (fit.intercept + fit.speed * trace.times[k]);
    ssr += r * r;
  }
  fit.standard_error = std::sqrt(ssr / static_cast<double>(count - 2) / stt);
  return fit;
}

namespace {

struct XiPoint {
  double xi;
  double u;
};

// Sorts by xi and averages points whose xi agree to round-off.
std::vector<XiPoint> merge_sorted(std::vector<XiPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const XiPoint& a, const XiPoint& b) { return a.xi < b.xi; });
  std::vector<XiPoint> out;
  std::size_t k = 0;
  while (k < pts.size()) {
    std::size_t j = k;
    double sum = 0.0;
    while (j < pts.size() && pts[j].xi - pts[k].xi <= 1e-9 * std::max(1.0, std::abs(pts[k].xi))) {
      sum += pts[j].u;
      ++j;
    }
    out.push_back({pts[k].xi, sum / static_cast<double>(j - k)});
    k = j;
  }
  return out;
}

// sup over points of a inside the xi-range of b of |a - interp_b|, and the
// number of such points.
std::pair<double, std::size_t> one_sided_defect(const std::vector<XiPoint>& a,
                                                const std::vector<XiPoint>& b) {
  if (b.size() < 2) return {0.0, 0};
  double worst = 0.0;
  std::size_t used = 0;
  std::size_t j = 0;
  for (const auto& pt : a) {
    if (pt.xi < b.front().xi || pt.xi > b.back().xi) continue;
    while (j + 1 < b.size() && b[j + 1].xi < pt.xi) ++j;
    const XiPoint& l = b[j];
    const XiPoint& r = b[std::min(j + 1, b.size() - 1)];
    const double span = r.xi - l.xi;
    const double w = span > 0.0 ? std::clamp((pt.xi - l.xi) / span, 0.0, 1.0) : 0.0;
    const double interp = l.u + w * (r.u - l.u);
    worst = std::max(worst, std::abs(pt.u - interp));
    ++used;
  }
  return {worst, used};
}

}  // namespace

WaveProfile wave_profile(const std::vector<LatticeState>& snapshots, double c,
                         const std::vector<double>& sample_times, const ProfileOptions& opt) {
  if (!(opt.cell_width > 0.0)) throw std::invalid_argument("wave_profile: cell_width");
  WaveProfile profile;
  profile.speed = c;

  // Residue classes mod 4: {0, 2} are even sites, {1, 3} odd sites.
  std::array<std::vector<XiPoint>, 4> classes;
  std::size_t used_frames = 0;
  for (const auto& s : snapshots) {
    const bool wanted = std::any_of(sample_times.begin(), sample_times.end(), [&](double t) {
      return std::abs(t - s.time) <= opt.time_tolerance;
    });
    if (!wanted) continue;
    ++used_frames;
    const SiteRange& w = s.window();
    for (Site i = std::max(w.lo, opt.site_min); i <= w.hi; ++i) {
      const auto r = static_cast<std::size_t>(((i % 4) + 4) % 4);
      classes[r].push_back({static_cast<double>(i) - c * s.time, s.values[i]});
    }
  }
  if (used_frames == 0) throw std::invalid_argument("wave_profile: no snapshot at the sample times");

  for (int parity = 0; parity < 2; ++parity) {
    const auto a = merge_sorted(classes[parity]);
    const auto b = merge_sorted(classes[parity + 2]);
    const auto [d_ab, n_ab] = one_sided_defect(a, b);
    const auto [d_ba, n_ba] = one_sided_defect(b, a);
    if (n_ab == 0 || n_ba == 0) {
      throw std::invalid_argument("wave_profile: xi ranges of sites i and i + 2 do not overlap");
    }
    profile.periodicity_defect = std::max({profile.periodicity_defect, d_ab, d_ba});

    std::vector<XiPoint> all = classes[parity];
    all.insert(all.end(), classes[parity + 2].begin(), classes[parity + 2].end());
    if (all.empty()) continue;
    std::sort(all.begin(), all.end(), [](const XiPoint& x, const XiPoint& y) { return x.xi < y.xi; });
    auto& cells = profile.cells[static_cast<std::size_t>(parity)];
    const double origin = std::floor(all.front().xi / opt.cell_width) * opt.cell_width;
    for (const auto& pt : all) {
      const double center = origin + (std::floor((pt.xi - origin) / opt.cell_width) + 0.5) * opt.cell_width;
      if (cells.empty() || std::abs(cells.back().xi - center) > 0.25 * opt.cell_width) {
        cells.push_back({center, 0.0, 0.0, 0});
      }
      cells.back().mean += pt.u;
      ++cells.back().count;
    }
    for (auto& cell : cells) cell.mean /= static_cast<double>(cell.count);
    double running = 0.0;
    for (auto it = cells.rbegin(); it != cells.rend(); ++it) {
      running = std::max(running, it->mean);
      it->envelope = running;
    }
    profile.left_limit[static_cast<std::size_t>(parity)] = cells.front().mean;
    profile.right_limit[static_cast<std::size_t>(parity)] = cells.back().mean;
  }
  return profile;
}

}  // namespace lkpp::sim
