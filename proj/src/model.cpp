#include "lattice_kpp/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lattice_kpp/errors.hpp"
#include "lattice_kpp/numerics.hpp"

namespace lkpp {

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || !(value > 0.0)) {
    std::ostringstream msg;
    msg << name << " must be finite and > 0 (got " << value << ")";
    throw std::invalid_argument(msg.str());
  }
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

void ModelParams::validate() const {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(gamma, "gamma");
  require_positive(eta, "eta");
  if (!std::isfinite(tau) || tau < 0.0) {
    throw std::invalid_argument("tau must be finite and >= 0 (got " + fmt(tau) + ")");
  }
}

std::string_view to_string(BirthKind kind) {
  switch (kind) {
    case BirthKind::monod: return "monod";
    case BirthKind::ricker: return "ricker";
    case BirthKind::linear: return "linear";
  }
  return "?";
}

BirthKind parse_birth_kind(std::string_view name) {
  if (name == "monod") return BirthKind::monod;
  if (name == "ricker") return BirthKind::ricker;
  if (name == "linear") return BirthKind::linear;
  throw std::invalid_argument("unknown birth law kind '" + std::string(name) + "'");
}

void BirthLaw::validate() const {
  require_positive(p, "birth.p");
  require_positive(q, "birth.q");
  if (!std::isfinite(survival) || !(survival > 0.0) || survival > 1.0) {
    throw std::invalid_argument("birth.survival must lie in (0, 1] (got " + fmt(survival) + ")");
  }
}

double BirthLaw::operator()(double w) const {
  switch (kind) {
    case BirthKind::monod: return survival * p * w / (q + w);
    case BirthKind::ricker: return survival * p * w * std::exp(-q * w);
    case BirthKind::linear: return survival * p * w;
  }
  return 0.0;
}

double BirthLaw::derivative(double w) const {
  switch (kind) {
    case BirthKind::monod: return survival * p * q / ((q + w) * (q + w));
    case BirthKind::ricker: return survival * p * std::exp(-q * w) * (1.0 - q * w);
    case BirthKind::linear: return survival * p;
  }
  return 0.0;
}

double BirthLaw::slope_at_zero() const {
  switch (kind) {
    case BirthKind::monod: return survival * p / q;
    case BirthKind::ricker:
    case BirthKind::linear: return survival * p;
  }
  return 0.0;
}

BirthLaw BirthLaw::with_slope_at_zero(double slope) const {
  BirthLaw out = *this;
  out.p = p * slope / slope_at_zero();
  return out;
}

BirthLaw BirthLaw::linearized() const { return linear(slope_at_zero()); }

double survival_factor(double immature_mortality, double tau) {
  if (immature_mortality < 0.0 || tau < 0.0) {
    throw std::invalid_argument("survival_factor: negative mortality or delay");
  }
  return std::exp(-immature_mortality * tau);
}

double big_gamma(const ModelParams& params) {
  const double denom = 2.0 * params.alpha + params.eta;
  if (!(denom > 0.0) || params.beta < 0.0) {
    throw std::invalid_argument("big_gamma: need 2 alpha + eta > 0 and beta >= 0");
  }
  return params.gamma + 2.0 * params.beta * params.eta / denom;
}

double beta0(const ModelParams& params, const BirthLaw& birth) {
  const double s = birth.slope_at_zero();
  if (s < params.gamma) {
    throw RegimeError("non-invadable regime: f'(0) = " + fmt(s) + " < gamma = " +
                      fmt(params.gamma));
  }
  return (s - params.gamma) * (2.0 * params.alpha + params.eta) / (2.0 * params.eta);
}

double eta0(const ModelParams& params, const BirthLaw& birth) {
  const double s = birth.slope_at_zero();
  const double g = big_gamma(params);
  if (s <= g) {
    throw RegimeError("eta0: requires f'(0) > Gamma (f'(0) = " + fmt(s) + ", Gamma = " +
                      fmt(g) + ")");
  }
  const double ceiling = 2.0 * params.beta + params.gamma;
  if (s >= ceiling) return std::numeric_limits<double>::infinity();
  return 2.0 * params.alpha * (s - params.gamma) / (ceiling - s);
}

SteadyState steady_state(const ModelParams& params, const BirthLaw& birth) {
  params.validate();
  birth.validate();
  const double g = big_gamma(params);
  const double s = birth.slope_at_zero();
  if (s <= g) {
    throw RegimeError("no positive equilibrium: f'(0) = " + fmt(s) + " <= Gamma = " + fmt(g));
  }
  auto excess = [&](double w) { return birth(w) - g * w; };

  double hi = 0.0;
  switch (birth.kind) {
    case BirthKind::monod:
      // f(w) < s p, so f(w) - Gamma w < 0 beyond s p / Gamma.
      hi = birth.survival * birth.p / g;
      break;
    case BirthKind::ricker:
      hi = numerics::expand_until(excess, 1.0 / birth.q, /*want_negative=*/true, 64);
      break;
    case BirthKind::linear:
      throw RegimeError("no positive equilibrium: linear birth law with f'(0) > Gamma grows "
                        "without bound");
  }
  // (f'(0) - Gamma) w dominates near zero, so the lower end is positive.
  double lo = hi * 1e-12;
  while (excess(lo) <= 0.0 && lo > 1e-300) lo *= 1e-3;

  const double w = numerics::bisect(excess, lo, hi);
  SteadyState ss;
  ss.w_star = w;
  ss.v_star = 2.0 * params.beta * w / (2.0 * params.alpha + params.eta);
  return ss;
}

std::string_view to_string(KppIssueKind kind) {
  switch (kind) {
    case KppIssueKind::no_positive_equilibrium: return "no_positive_equilibrium";
    case KppIssueKind::not_monotone: return "not_monotone";
    case KppIssueKind::not_sublinear: return "not_sublinear";
    case KppIssueKind::not_above_mortality: return "not_above_mortality";
  }
  return "?";
}

bool KppReport::has(KppIssueKind kind) const {
  for (const auto& issue : issues) {
    if (issue.kind == kind) return true;
  }
  return false;
}

KppReport validate_kpp(const BirthLaw& birth, const ModelParams& params,
                       const KppCheckOptions& options) {
  if (options.grid_points < 2) throw std::invalid_argument("validate_kpp: grid_points < 2");
  KppReport report;
  const double g = big_gamma(params);

  double w_upper = options.fallback_w_upper;
  try {
    w_upper = steady_state(params, birth).w_star;
  } catch (const RegimeError& e) {
    report.issues.push_back({KppIssueKind::no_positive_equilibrium, 0.0, 1, e.what()});
  }
  report.w_upper = w_upper;

  const std::size_t n = options.grid_points;
  const double h = w_upper / static_cast<double>(n);
  // Relative slack for round-off in the monotonicity comparisons.
  constexpr double slack = 1e-12;

  struct Tally {
    double first = 0.0;
    std::size_t count = 0;
    void hit(double w) {
      if (count++ == 0) first = w;
    }
  } monotone, sublinear, positive;

  double f_prev = birth(h);
  double ratio_prev = f_prev / h;
  if (!(f_prev - g * h > 0.0)) positive.hit(h);
  for (std::size_t k = 2; k <= n; ++k) {
    const double w = h * static_cast<double>(k);
    const double fw = birth(w);
    const double ratio = fw / w;
    if (fw < f_prev - slack * std::abs(f_prev)) monotone.hit(w);
    if (ratio > ratio_prev + slack * std::abs(ratio_prev)) sublinear.hit(w);
    // The interval is open at w*, so the last grid point is skipped.
    if (k < n && !(fw - g * w > 0.0)) positive.hit(w);
    f_prev = fw;
    ratio_prev = ratio;
  }

  auto emit = [&](KppIssueKind kind, const Tally& t, const char* what) {
    if (t.count == 0) return;
    std::ostringstream msg;
    msg << what << " at " << t.count << " grid points, first at w = " << t.first;
    report.issues.push_back({kind, t.first, t.count, msg.str()});
  };
  emit(KppIssueKind::not_monotone, monotone, "f decreasing");
  emit(KppIssueKind::not_sublinear, sublinear, "f(w)/w increasing");
  emit(KppIssueKind::not_above_mortality, positive, "f(w) - Gamma w <= 0");

  if (birth.kind == BirthKind::ricker && monotone.count == 0) {
    report.warnings.push_back("ricker law accepted: monotone range [0, 1/q] = [0, " +
                              fmt(1.0 / birth.q) + "] contains [0, w*]");
  }
  return report;
}

}  // namespace lkpp
