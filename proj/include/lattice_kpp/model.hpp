#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lattice_kpp/site_vector.hpp"

namespace lkpp {

// Demography of the 2-periodic habitat. Even sites are good (birth, mortality
// gamma), odd sites are bad (no birth, mortality eta). alpha is the hopping
// rate into good sites, beta the hopping rate into bad sites.
struct ModelParams {
  double alpha = 1.0;
  double beta = 0.5;
  double gamma = 0.1;
  double eta = 0.2;
  double tau = 0.0;

  // Throws std::invalid_argument unless all rates are finite and strictly
  // positive and tau >= 0.
  void validate() const;
};

enum class BirthKind { monod, ricker, linear };

std::string_view to_string(BirthKind kind);
BirthKind parse_birth_kind(std::string_view name);

// Recruitment into the mature class at good sites:
//   monod   f(w) = s * p w / (q + w)
//   ricker  f(w) = s * p w exp(-q w)
//   linear  f(w) = s * p w            (q unused; linearised / degenerate law)
// with s the survival factor through the maturation period.
struct BirthLaw {
  BirthKind kind = BirthKind::monod;
  double p = 1.0;
  double q = 1.0;
  double survival = 1.0;

  void validate() const;

  double operator()(double w) const;
  double derivative(double w) const;
  // f'(0).
  double slope_at_zero() const;

  // Same law with p rescaled so that f'(0) equals the requested slope.
  BirthLaw with_slope_at_zero(double slope) const;
  // Linearisation f(w) = f'(0) w.
  BirthLaw linearized() const;

  static BirthLaw monod(double p, double q, double survival = 1.0) {
    return {BirthKind::monod, p, q, survival};
  }
  static BirthLaw ricker(double p, double q, double survival = 1.0) {
    return {BirthKind::ricker, p, q, survival};
  }
  static BirthLaw linear(double slope) { return {BirthKind::linear, slope, 1.0, 1.0}; }
};

// exp(-immature_mortality * tau), the fraction of newborns surviving to maturity.
double survival_factor(double immature_mortality, double tau);

// Gamma = gamma + 2 beta eta / (2 alpha + eta), the effective mortality of
// good-site adults. Accepts beta = 0.
double big_gamma(const ModelParams& params);

// beta0 = (f'(0) - gamma)(2 alpha + eta) / (2 eta). Throws RegimeError when
// f'(0) < gamma; returns 0 at f'(0) = gamma.
double beta0(const ModelParams& params, const BirthLaw& birth);

// eta0 = 2 alpha (f'(0) - gamma) / (2 beta + gamma - f'(0)) if f'(0) < 2 beta +
// gamma, +infinity otherwise. Throws RegimeError when f'(0) <= Gamma.
double eta0(const ModelParams& params, const BirthLaw& birth);

struct SteadyState {
  double w_star = 0.0;
  double v_star = 0.0;

  double at(Site i) const { return is_even(i) ? w_star : v_star; }
};

// Unique positive root of f(w) = Gamma w and the matching bad-site density.
// Throws RegimeError when f'(0) <= Gamma or no crossing exists.
SteadyState steady_state(const ModelParams& params, const BirthLaw& birth);

enum class KppIssueKind {
  no_positive_equilibrium,
  not_monotone,
  not_sublinear,
  not_above_mortality,
};

std::string_view to_string(KppIssueKind kind);

struct KppIssue {
  KppIssueKind kind;
  double first_w;          // first grid point where the check failed
  std::size_t count;       // number of failing grid points
  std::string detail;
};

struct KppReport {
  std::vector<KppIssue> issues;
  std::vector<std::string> warnings;
  double w_upper = 0.0;    // right end of the checked interval

  bool ok() const { return issues.empty(); }
  bool has(KppIssueKind kind) const;
};

struct KppCheckOptions {
  std::size_t grid_points = 10000;
  // Interval checked when no positive equilibrium exists.
  double fallback_w_upper = 1.0;
};

// Grid check of the KPP conditions on (0, w*]: f nondecreasing, f(w)/w
// nonincreasing, f(w) - Gamma w > 0 on (0, w*). Failures are report entries.
KppReport validate_kpp(const BirthLaw& birth, const ModelParams& params,
                       const KppCheckOptions& options = {});

}  // namespace lkpp
