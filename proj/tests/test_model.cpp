#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "lattice_kpp/errors.hpp"
#include "lattice_kpp/model.hpp"
#include "lattice_kpp/numerics.hpp"

using namespace lkpp;
using namespace lkpp::numerics;

namespace {

ModelParams reference() { return {1.0, 0.5, 0.1, 0.2, 0.0}; }

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(reference().validate());
  ModelParams p = reference();
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reference();
  p.tau = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reference();
  p.alpha = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("birth laws") {
  const BirthLaw m = BirthLaw::monod(2.0, 4.0, 0.5);
  CHECK(m(0.0) == 0.0);
  CHECK(m.slope_at_zero() == doctest::Approx(0.25));
  CHECK(m(4.0) == doctest::Approx(0.5 * 2.0 * 4.0 / 8.0));
  const BirthLaw r = BirthLaw::ricker(3.0, 0.5);
  CHECK(r.slope_at_zero() == doctest::Approx(3.0));
  CHECK(r(2.0) == doctest::Approx(6.0 * std::exp(-1.0)));

  // derivative against a central difference
  for (const BirthLaw& f : {m, r}) {
    for (double w : {0.0, 0.3, 1.7, 5.0}) {
      const double h = 1e-6;
      const double fd = (f(w + h) - f(std::max(w - h, 0.0))) / (w > 0 ? 2 * h : h);
      CHECK(f.derivative(w) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  CHECK(m.with_slope_at_zero(1.7).slope_at_zero() == doctest::Approx(1.7));
  CHECK(m.linearized()(3.0) == doctest::Approx(0.75));

  BirthLaw bad = BirthLaw::monod(1, 1, 0.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(survival_factor(0.3, 2.0) == doctest::Approx(std::exp(-0.6)));
  CHECK(parse_birth_kind("ricker") == BirthKind::ricker);
  CHECK_THROWS_AS(parse_birth_kind("logistic"), std::invalid_argument);
}

TEST_CASE("effective mortality") {
  const ModelParams p = reference();
  CHECK(big_gamma(p) == doctest::Approx(0.1909090909090909).epsilon(1e-14));

  ModelParams zero_beta = p;
  zero_beta.beta = 0.0;
  CHECK(big_gamma(zero_beta) == 0.1);

  ModelParams huge_eta = p;
  huge_eta.eta = 1e9;
  CHECK(std::abs(big_gamma(huge_eta) - 1.1) < 1e-8);

  // increasing in beta and in eta, bounded by 2 beta + gamma
  ModelParams a = p, b = p;
  a.beta = 0.3;
  b.beta = 0.31;
  CHECK(big_gamma(a) < big_gamma(b));
  double prev = 0.0;
  for (double eta : {0.01, 0.1, 1.0, 10.0, 100.0, 1e4}) {
    ModelParams q = p;
    q.eta = eta;
    const double g = big_gamma(q);
    CHECK(g > prev);
    CHECK(g < 2 * p.beta + p.gamma);
    prev = g;
  }
}

TEST_CASE("beta0") {
  const ModelParams p = reference();
  const BirthLaw f = BirthLaw::monod(1, 1);
  CHECK(beta0(p, f) == doctest::Approx(4.95).epsilon(1e-15));
  CHECK(beta0(p, BirthLaw::linear(0.1)) == 0.0);
  CHECK_THROWS_AS(beta0(p, BirthLaw::linear(0.05)), RegimeError);

  ModelParams huge_eta = p;
  huge_eta.eta = 1e9;
  CHECK(std::abs(beta0(huge_eta, f) - 0.45) < 1e-6);

  // beta0 is the supremum of betas with f'(0) > Gamma
  ModelParams at = p;
  at.beta = beta0(p, f);
  CHECK(big_gamma(at) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eta0") {
  const ModelParams p = reference();
  const BirthLaw f = BirthLaw::monod(1, 1);
  const double e0 = eta0(p, f);
  CHECK(e0 == doctest::Approx(18.0).epsilon(1e-14));
  ModelParams at = p;
  at.eta = e0;
  CHECK(big_gamma(at) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(std::isinf(eta0(p, BirthLaw::linear(1.1))));
  CHECK(std::isinf(eta0(p, BirthLaw::linear(3.0))));

  ModelParams crowded = p;
  crowded.beta = 5.0;  // Gamma > f'(0)
  CHECK_THROWS_AS(eta0(crowded, f), RegimeError);
}

TEST_CASE("beta0 and eta0 agree on a random grid") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int tested = 0;
  while (tested < 100) {
    ModelParams p;
    p.alpha = 0.2 + 3.0 * u(rng);
    p.beta = 0.05 + 3.0 * u(rng);
    p.gamma = 0.05 + 0.5 * u(rng);
    p.eta = 0.05 + 5.0 * u(rng);
    const BirthLaw f = BirthLaw::linear(p.gamma + (2 * p.beta) * u(rng));
    const double s = f.slope_at_zero();
    if (!(s > big_gamma(p) && s < 2 * p.beta + p.gamma)) continue;
    ++tested;
    const double e0 = eta0(p, f);
    // perturb eta and beta on both sides of the thresholds
    for (double eta : {0.5 * e0, 0.99 * e0, 1.01 * e0, 2.0 * e0}) {
      ModelParams q = p;
      q.eta = eta;
      CHECK((q.beta < beta0(q, f)) == (eta < e0));
    }
  }
}

TEST_CASE("steady state") {
  const ModelParams p = reference();
  const BirthLaw f = BirthLaw::monod(1, 1);
  const SteadyState s = steady_state(p, f);
  const double g = big_gamma(p);
  CHECK(s.w_star == doctest::Approx(1.0 / g - 1.0).epsilon(1e-13));
  CHECK(s.w_star == doctest::Approx(4.238095238095238).epsilon(1e-12));
  CHECK(s.v_star == doctest::Approx(1.926406926406926).epsilon(1e-12));
  CHECK(std::abs(f(s.w_star) - g * s.w_star) <= 1e-12 * g * s.w_star);
  CHECK(s.v_star * (2 * p.alpha + p.eta) == doctest::Approx(2 * p.beta * s.w_star).epsilon(1e-15));
  CHECK(s.at(0) == s.w_star);
  CHECK(s.at(-3) == s.v_star);

  // p = 2 Gamma q puts the root at w* = q
  const BirthLaw exact = BirthLaw::monod(2 * g * 3.0, 3.0);
  CHECK(steady_state(p, exact).w_star == doctest::Approx(3.0).epsilon(1e-13));

  const SteadyState rk = steady_state(p, BirthLaw::ricker(1.0, 1.0));
  CHECK(rk.w_star == doctest::Approx(std::log(1.0 / g)).epsilon(1e-12));

  ModelParams crowded = p;
  crowded.beta = 5.0;
  CHECK_THROWS_AS(steady_state(crowded, f), RegimeError);
  CHECK_THROWS_AS(steady_state(p, BirthLaw::linear(2.0)), RegimeError);
}

TEST_CASE("KPP validation") {
  const ModelParams p = reference();
  const KppReport ok = validate_kpp(BirthLaw::monod(1, 1), p);
  CHECK(ok.ok());
  CHECK(ok.warnings.empty());

  // Ricker with w* = ln(1/Gamma) ~ 1.656 > 1/q = 1 is not monotone beyond 1.
  const KppReport rk = validate_kpp(BirthLaw::ricker(1, 1), p);
  REQUIRE(rk.has(KppIssueKind::not_monotone));
  for (const auto& issue : rk.issues) {
    if (issue.kind == KppIssueKind::not_monotone) CHECK(issue.first_w > 1.0);
  }

  // Ricker whose monotone range covers [0, w*] passes with a warning:
  // w* = ln(p / Gamma) / q <= 1/q when p <= e Gamma.
  const KppReport rk_ok = validate_kpp(BirthLaw::ricker(0.4, 1.0), p);
  CHECK(rk_ok.ok());
  CHECK_FALSE(rk_ok.warnings.empty());

  // f(w) = Gamma w: f - Gamma w is never strictly positive.
  const KppReport lin = validate_kpp(BirthLaw::linear(big_gamma(p)), p);
  CHECK_FALSE(lin.ok());
  CHECK((lin.has(KppIssueKind::no_positive_equilibrium) ||
         lin.has(KppIssueKind::not_above_mortality)));
}

TEST_CASE("root finders") {
  const double r = bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0);
  CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const double n = newton_bisect([](double x) { return std::pair{std::cos(x) - x, -std::sin(x) - 1}; },
                                 0.0, 1.0, 1e-15);
  CHECK(n == doctest::Approx(0.7390851332151607).epsilon(1e-14));
  CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0), NumericalError);
  const auto m = golden_section([](double x) { return (x - 0.3) * (x - 0.3) + 2.0; }, -1.0, 2.0, 1e-10);
  CHECK(std::abs(m.x - 0.3) < 1e-7);  // sqrt(eps) floor of any minimiser
  CHECK(m.value == doctest::Approx(2.0).epsilon(1e-15));
}
