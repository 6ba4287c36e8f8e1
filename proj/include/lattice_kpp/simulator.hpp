#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "lattice_kpp/model.hpp"
#include "lattice_kpp/site_vector.hpp"

namespace lkpp::sim {

struct LatticeState {
  double time = 0.0;
  SiteVector values;

  const SiteRange& window() const { return values.range(); }
};

// Time step and delay alignment. dt divides tau exactly when tau > 0.
struct StepPlan {
  double dt = 0.0;
  int delay_steps = 0;  // m with tau = m dt; 0 when tau = 0
};

// dt <= 0.1 / (2 max(alpha, beta) + max(gamma, eta) + f'(0)). With tau > 0,
// dt = tau/m for the smallest admissible m. With tau = 0 and a positive
// sample_interval, dt is reduced so that it divides the sample interval.
StepPlan choose_step(const ModelParams& params, const BirthLaw& birth,
                     double sample_interval = 0.0);

// Rolling window of the m + 1 frames u(t - tau), ..., u(t).
class HistoryBuffer {
public:
  HistoryBuffer(StepPlan plan, LatticeState initial);

  const StepPlan& plan() const { return plan_; }
  double dt() const { return plan_.dt; }
  double time() const { return frames_.back().time; }
  const SiteRange& window() const { return frames_.back().window(); }
  std::size_t frame_count() const { return frames_.size(); }

  const LatticeState& current() const { return frames_.back(); }
  // Frame at time() - back * dt, back in [0, delay_steps].
  const LatticeState& frame_back(int back) const;
  // Oldest frame, u(t - tau).
  const LatticeState& delayed() const { return frames_.front(); }

  void push(LatticeState next);

private:
  StepPlan plan_;
  std::deque<LatticeState> frames_;
};

enum class InitialKind { compact_block, equilibrium, zero };
std::string_view to_string(InitialKind kind);
InitialKind parse_initial_kind(std::string_view name);

struct InitialData {
  InitialKind kind = InitialKind::compact_block;
  SiteRange window{-400, 400};
  SiteRange support{-5, 5};
  double amplitude = 1.0;  // fraction of u*_i
};

// History constant in theta on [-tau, 0].
HistoryBuffer make_initial(const InitialData& data, const ModelParams& params,
                           const BirthLaw& birth, StepPlan plan);

enum class Scheme { rk4, euler };
std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct FrontTrace {
  double level = 0.5;
  std::vector<double> times;
  std::vector<double> positions;
  // First sample time at which either front came within the margin of the
  // window edge, if that happened while contamination checks were off.
  std::optional<double> boundary_hit_time;
};

struct IntegrateOptions {
  Scheme scheme = Scheme::rk4;
  double sample_interval = 0.5;
  double theta = 0.5;
  Site margin = 20;
  // Snapshots are stored for sample times >= keep_from.
  double keep_from = 0.0;
  bool keep_snapshots = true;
  // Abort when a state leaves [-eps, u*_i + eps], eps = 1e-9 w*. Valid when
  // the initial data lie in [0, U*] and the birth law is KPP.
  bool check_invariant_region = true;
  // Abort when some value exceeds instability_factor * w*.
  bool check_instability = true;
  double instability_factor = 2.0;
  // Abort when a front reaches the margin; otherwise it is recorded in the trace.
  bool check_contamination = true;
  // Steady state used for the front level and the invariant region; computed
  // from the birth law when absent.
  std::optional<SteadyState> reference;
};

struct Trajectory {
  double dt = 0.0;
  SteadyState reference;
  std::vector<LatticeState> snapshots;
  FrontTrace front;
  LatticeState final_state;
};

// Integrates U' = (A + B)U + F(U(t - tau)) on the window of the history with
// zero values outside it, to time horizon (absolute). Advances the history in
// place.
Trajectory integrate(HistoryBuffer& history, double horizon, const ModelParams& params,
                     const BirthLaw& birth, const IntegrateOptions& options = {});

// Rightmost crossing of u_i = theta u*_i among even sites, linearly
// interpolated between consecutive even sites. Returns the rightmost even site
// when that site is at or above the level, and nothing when no even site reaches it.
std::optional<double> front_position(const LatticeState& state, double theta,
                                     const SteadyState& reference);

// Mirror of front_position for the left-moving front.
std::optional<double> left_front_position(const LatticeState& state, double theta,
                                          const SteadyState& reference);

struct SpeedFit {
  double speed = 0.0;
  double standard_error = 0.0;
  double intercept = 0.0;
  std::size_t samples = 0;
};

// Least-squares slope of position against time over the last fit_fraction of
// the samples. Needs at least 10 samples in the fit window.
SpeedFit empirical_speed(const FrontTrace& trace, double fit_fraction = 0.5);

struct ProfileCell {
  double xi = 0.0;        // cell center
  double mean = 0.0;
  double envelope = 0.0;  // smallest nonincreasing function above the means
  std::size_t count = 0;
};

struct WaveProfile {
  double speed = 0.0;
  std::array<std::vector<ProfileCell>, 2> cells;  // [0] even sites, [1] odd sites
  // max over parity classes of |W(i, xi) - W(i + 2, xi)| on overlapping xi.
  double periodicity_defect = 0.0;
  std::array<double, 2> left_limit{};   // mean of the lowest-xi cell
  std::array<double, 2> right_limit{};  // mean of the highest-xi cell
};

struct ProfileOptions {
  double cell_width = 0.5;
  // Sites left of site_min are ignored (excludes the left-moving front).
  Site site_min = 0;
  // Snapshot times within this distance of a requested time are used.
  double time_tolerance = 1e-9;
};

// Collapses snapshots onto xi = i - c t per parity class.
WaveProfile wave_profile(const std::vector<LatticeState>& snapshots, double c,
                         const std::vector<double>& sample_times,
                         const ProfileOptions& options = {});

}  // namespace lkpp::sim
