#include "lattice_kpp/dispersion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lattice_kpp/errors.hpp"
#include "lattice_kpp/numerics.hpp"

namespace lkpp::dispersion {

namespace {

// (e^mu + e^-mu)^2 = 4 cosh^2 mu, without cancellation.
double cosh_sq4(double mu) {
  const double c = std::cosh(mu);
  return 4.0 * c * c;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

void require_speed_regime(double beta, const ModelParams& params, const BirthLaw& birth) {
  ModelParams p = params;
  p.beta = beta;
  p.validate();
  birth.validate();
  const double s = birth.slope_at_zero();
  if (s <= params.gamma) {
    throw RegimeError("no positive growth root: f'(0) = " + fmt(s) + " <= gamma = " +
                      fmt(params.gamma));
  }
  const double b0 = beta0(params, birth);
  if (!(beta < b0) || !(s > big_gamma(p))) {
    throw RegimeError("beta = " + fmt(beta) + " is outside (0, beta0) with beta0 = " + fmt(b0));
  }
}

// ratio(mu) = lambda(mu)/mu and its mu-derivative numerator
// mu lambda'(mu) - lambda(mu), lambda' = -F_mu / F_lambda.
struct RatioEval {
  double lambda;
  double ratio;
  double stationarity;  // d/dmu (lambda/mu)
};

RatioEval eval_ratio(double mu, double beta, const ModelParams& p, const BirthLaw& f) {
  const double lam = lambda_of_mu(mu, beta, p, f);
  const double dlam = -dF_dmu(lam, mu, beta, p) / dF_dlambda(lam, mu, beta, p, f);
  return {lam, lam / mu, (mu * dlam - lam) / (mu * mu)};
}

}  // namespace

double dispersion_F(double lambda, double mu, double beta, const ModelParams& p,
                    const BirthLaw& f) {
  const double denom = lambda + 2.0 * p.alpha + p.eta;
  if (!(denom > 0.0)) throw std::domain_error("dispersion_F: lambda at or below the pole");
  return -(lambda + 2.0 * beta + p.gamma) + p.alpha * beta * cosh_sq4(mu) / denom +
         f.slope_at_zero() * std::exp(-lambda * p.tau);
}

double dF_dlambda(double lambda, double mu, double beta, const ModelParams& p,
                  const BirthLaw& f) {
  const double denom = lambda + 2.0 * p.alpha + p.eta;
  return -1.0 - p.alpha * beta * cosh_sq4(mu) / (denom * denom) -
         p.tau * f.slope_at_zero() * std::exp(-lambda * p.tau);
}

double dF_dmu(double lambda, double mu, double beta, const ModelParams& p) {
  // d/dmu (e^mu + e^-mu)^2 = 2 (e^{2mu} - e^{-2mu}) = 4 sinh(2 mu)
  return 4.0 * p.alpha * beta * std::sinh(2.0 * mu) / (lambda + 2.0 * p.alpha + p.eta);
}

double dF_dbeta(double lambda, double mu, const ModelParams& p) {
  return -2.0 + p.alpha * cosh_sq4(mu) / (lambda + 2.0 * p.alpha + p.eta);
}

double lambda_of_mu(double mu, double beta, const ModelParams& p, const BirthLaw& f) {
  if (!(mu >= 0.0)) throw std::invalid_argument("lambda_of_mu: mu must be >= 0");
  const double f0 = dispersion_F(0.0, mu, beta, p, f);
  if (!(f0 > 0.0)) {
    throw RegimeError("non-KPP regime: F(0, mu, beta) = " + fmt(f0) + " <= 0 at mu = " + fmt(mu));
  }
  auto value = [&](double lam) { return dispersion_F(lam, mu, beta, p, f); };
  // F is strictly decreasing in lambda, so doubling finds a negative value.
  const double start = std::max(1.0, f0);
  const double hi = numerics::expand_until(value, start, /*want_negative=*/true);
  return numerics::newton_bisect(
      [&](double lam) {
        return std::pair{dispersion_F(lam, mu, beta, p, f), dF_dlambda(lam, mu, beta, p, f)};
      },
      0.0, hi);
}

DispersionResult spreading_speed(double beta, const ModelParams& p, const BirthLaw& f,
                                 const SpeedOptions& opt) {
  require_speed_regime(beta, p, f);
  if (opt.grid_points < 3 || !(opt.mu_min > 0.0) || !(opt.mu_max > opt.mu_min)) {
    throw std::invalid_argument("spreading_speed: bad mu search options");
  }

  double mu_lo = opt.mu_min;
  std::vector<double> mus(opt.grid_points);
  std::vector<double> ratios(opt.grid_points);
  std::size_t best = 0;
  for (;;) {
    const double log_lo = std::log(mu_lo);
    const double step = (std::log(opt.mu_max) - log_lo) / static_cast<double>(opt.grid_points - 1);
    for (std::size_t k = 0; k < opt.grid_points; ++k) {
      mus[k] = std::exp(log_lo + step * static_cast<double>(k));
      ratios[k] = lambda_of_mu(mus[k], beta, p, f) / mus[k];
    }
    best = static_cast<std::size_t>(std::min_element(ratios.begin(), ratios.end()) - ratios.begin());
    if (best != 0 || mu_lo * 1e-3 < opt.mu_floor) break;
    mu_lo *= 1e-3;
  }
  if (best == 0 || best + 1 == opt.grid_points) {
    throw NumericalError("spreading_speed: minimum of lambda(mu)/mu on the search boundary");
  }

  DispersionResult out;
  for (std::size_t k = 1; k + 1 < opt.grid_points; ++k) {
    const bool local_min = ratios[k] < ratios[k - 1] && ratios[k] <= ratios[k + 1];
    if (local_min && k != best && ratios[k] - ratios[best] > 1e-6) out.multiple_minima = true;
  }

  const double lo = mus[best - 1];
  const double hi = mus[best + 1];
  auto ratio = [&](double mu) { return lambda_of_mu(mu, beta, p, f) / mu; };
  double mu_star = numerics::golden_section(ratio, lo, hi, opt.golden_width).x;

  // The ratio is flat at its minimum, so comparisons of values resolve mu* only
  // to about sqrt(machine epsilon). Refine on the sign change of the analytic
  // derivative.
  auto slope = [&](double mu) { return eval_ratio(mu, beta, p, f).stationarity; };
  const double s_lo = slope(lo);
  const double s_hi = slope(hi);
  if (s_lo < 0.0 && s_hi > 0.0) mu_star = numerics::bisect(slope, lo, hi);

  const RatioEval at = eval_ratio(mu_star, beta, p, f);
  out.mu_star = mu_star;
  out.lambda_star_at_min = at.lambda;
  out.c_star = at.ratio;
  out.residual_F = std::abs(dispersion_F(out.c_star * mu_star, mu_star, beta, p, f));
  out.residual_stationarity = std::abs(at.stationarity);
  return out;
}

double lambda_star(const ModelParams& p, const BirthLaw& f) {
  const double s = f.slope_at_zero();
  if (s <= p.gamma) {
    throw RegimeError("lambda_star: requires f'(0) > gamma (f'(0) = " + fmt(s) + ", gamma = " +
                      fmt(p.gamma) + ")");
  }
  if (p.tau == 0.0) return s - p.gamma;
  // e^{-lambda tau} <= 1 puts the root below f'(0) - gamma.
  return numerics::newton_bisect(
      [&](double lam) {
        const double e = s * std::exp(-lam * p.tau);
        return std::pair{-(lam + p.gamma) + e, -1.0 - p.tau * e};
      },
      0.0, s - p.gamma);
}

double h_eval(double mu) {
  if (mu < 0.0) throw std::invalid_argument("h_eval: mu must be >= 0");
  return 2.0 * mu * std::sinh(mu);
}

double h_inverse(double y) {
  if (!(y >= 0.0)) throw std::invalid_argument("h_inverse: y must be >= 0");
  if (y == 0.0) return 0.0;
  // h(mu) >= 2 mu^2, so the root lies below sqrt(y/2).
  const double hi = std::sqrt(0.5 * y);
  return numerics::newton_bisect(
      [&](double mu) {
        return std::pair{h_eval(mu) - y, 2.0 * std::sinh(mu) + 2.0 * mu * std::cosh(mu)};
      },
      0.0, hi * (1.0 + 1e-12));
}

double c_coefficient(double lambda, double beta, const ModelParams& p, const BirthLaw& f) {
  if (!(beta > 0.0)) throw std::invalid_argument("c_coefficient: beta must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("c_coefficient: lambda must be > 0");
  const double shifted = lambda + 2.0 * p.alpha + p.eta;
  const double s = f.slope_at_zero();
  return lambda / std::sqrt(2.0 * p.alpha * shifted) +
         lambda * (1.0 + p.tau * s * std::exp(-lambda * p.tau)) * std::sqrt(shifted) /
             (beta * std::sqrt(8.0 * p.alpha));
}

namespace {
double mu_bar_of(double lam, const ModelParams& p) {
  return std::acosh(std::sqrt((lam + 2.0 * p.alpha + p.eta) / (2.0 * p.alpha)));
}
}  // namespace

double optimal_beta_residual(double beta, const ModelParams& p, const BirthLaw& f) {
  const double lam = lambda_star(p, f);
  return h_inverse(c_coefficient(lam, beta, p, f)) - mu_bar_of(lam, p);
}

OptimalDispersal optimal_beta(const ModelParams& p, const BirthLaw& f) {
  p.validate();
  f.validate();
  OptimalDispersal out;
  out.lambda_star = lambda_star(p, f);
  out.mu_bar = mu_bar_of(out.lambda_star, p);
  out.c_max = out.lambda_star / out.mu_bar;
  out.beta0 = beta0(p, f);

  auto g = [&](double beta) {
    return h_inverse(c_coefficient(out.lambda_star, beta, p, f)) - out.mu_bar;
  };
  const double eps = 1e-6 * out.beta0;
  const double g_lo = g(eps);
  const double g_hi = g(out.beta0 - eps);
  if (!(g_lo > 0.0 && g_hi < 0.0)) {
    throw NumericalError("optimal_beta: G has no sign change on (eps, beta0 - eps): G(eps) = " +
                         fmt(g_lo) + ", G(beta0 - eps) = " + fmt(g_hi));
  }
  out.beta1 = numerics::bisect(g, eps, out.beta0 - eps);
  out.residual_G = std::abs(g(out.beta1));
  return out;
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::kpp_ok: return "KPP_OK";
    case Regime::beta_out_of_range: return "BETA_OUT_OF_RANGE";
    case Regime::no_positive_root: return "NO_POSITIVE_ROOT";
  }
  return "?";
}

std::string_view to_string(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::beta: return "beta";
    case SweepParameter::eta: return "eta";
    case SweepParameter::fprime0: return "fprime0";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "beta") return SweepParameter::beta;
  if (name == "eta") return SweepParameter::eta;
  if (name == "fprime0") return SweepParameter::fprime0;
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) + "'");
}

void apply_sweep_value(SweepParameter parameter, double value, ModelParams& params,
                       BirthLaw& birth) {
  if (!std::isfinite(value) || !(value > 0.0)) {
    throw std::invalid_argument("sweep value must be finite and > 0 (got " + fmt(value) + ")");
  }
  switch (parameter) {
    case SweepParameter::beta: params.beta = value; break;
    case SweepParameter::eta: params.eta = value; break;
    case SweepParameter::fprime0: birth = birth.with_slope_at_zero(value); break;
  }
}

namespace {

SweepRow sweep_point(SweepParameter parameter, double value, ModelParams p, BirthLaw f,
                     const SpeedOptions& opt) {
  apply_sweep_value(parameter, value, p, f);
  SweepRow row;
  row.value = value;
  row.c_star = std::numeric_limits<double>::quiet_NaN();
  row.mu_star = std::numeric_limits<double>::quiet_NaN();
  const double s = f.slope_at_zero();
  if (s <= p.gamma) {
    row.regime = Regime::no_positive_root;
    return row;
  }
  if (s <= big_gamma(p)) {
    row.regime = Regime::beta_out_of_range;
    return row;
  }
  try {
    const DispersionResult r = spreading_speed(p.beta, p, f, opt);
    row.c_star = r.c_star;
    row.mu_star = r.mu_star;
    row.regime = Regime::kpp_ok;
  } catch (const RegimeError&) {
    row.regime = Regime::beta_out_of_range;
  } catch (const NumericalError&) {
    row.regime = Regime::no_positive_root;
  }
  return row;
}

}  // namespace

SweepTable sweep(SweepParameter parameter, const std::vector<double>& grid,
                 const ModelParams& params, const BirthLaw& birth, std::size_t threads,
                 const SpeedOptions& options) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  for (double v : grid) {
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw std::invalid_argument("sweep value must be finite and > 0 (got " + fmt(v) + ")");
    }
  }
  SweepTable table;
  table.parameter = parameter;
  table.rows.resize(grid.size());

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, grid.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < grid.size(); k = next++) {
      try {
        table.rows[k] = sweep_point(parameter, grid[k], params, birth, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

}  // namespace lkpp::dispersion
