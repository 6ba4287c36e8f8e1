#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "lattice_kpp/kernel.hpp"
#include "lattice_kpp/kernel_suite.hpp"
#include "lattice_kpp/model.hpp"

using namespace lkpp;
using namespace lkpp::kernel;

namespace {

ModelParams reference() { return {1.0, 0.5, 0.1, 0.2, 0.0}; }

// Dense A on sites [-half, half], then exp(tA) by Pade scaling and squaring.
struct DenseKernel {
  Site half;
  Eigen::MatrixXd k;

  DenseKernel(double t, Site half_width, const ModelParams& p) : half(half_width) {
    const Eigen::Index n = 2 * half + 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const Site i = r - half;
      const double v = is_even(i) ? p.beta : p.alpha;
      if (r > 0) a(r, r - 1) = v;
      if (r + 1 < n) a(r, r + 1) = v;
    }
    k = (t * a).exp();
  }
  double operator()(Site i, Site j) const { return k(i + half, j + half); }
};

}  // namespace

TEST_CASE("band operators") {
  const ModelParams p = reference();
  CHECK(entry(OperatorKind::A, 0, 1, p) == 0.5);
  CHECK(entry(OperatorKind::A, 1, 0, p) == 1.0);
  CHECK(entry(OperatorKind::A, 0, 2, p) == 0.0);
  CHECK(entry(OperatorKind::B, 0, 0, p) == doctest::Approx(-1.1));
  CHECK(entry(OperatorKind::B, 1, 1, p) == doctest::Approx(-2.2));
  CHECK(entry(OperatorKind::A_plus_B, 1, 1, p) == doctest::Approx(-2.2));
  CHECK(entry(OperatorKind::A_plus_B, -1, 0, p) == 1.0);
  for (Site i = -5; i <= 5; ++i) {
    for (Site j = -5; j <= 5; ++j) {
      CHECK(entry(OperatorKind::A_plus_B, i + 2, j + 2, p) == entry(OperatorKind::A_plus_B, i, j, p));
    }
  }
}

TEST_CASE("generator stencil") {
  const ModelParams p = reference();
  SiteVector e0({-2, 2});
  e0[0] = 1.0;
  const SiteVector g = apply_generator(e0, p);
  CHECK(g[0] == doctest::Approx(-1.1));
  CHECK(g[1] == doctest::Approx(0.5));
  CHECK(g[-1] == doctest::Approx(0.5));
  CHECK(g[2] == 0.0);
  CHECK(g[-2] == 0.0);

  const SiteVector zero = apply_generator(SiteVector({-3, 3}), p);
  for (double v : zero.values()) CHECK(v == 0.0);

  // The equilibrium balances the birth term on interior sites.
  const BirthLaw f = BirthLaw::monod(1, 1);
  const SteadyState s = steady_state(p, f);
  SiteVector u({-10, 10});
  for (Site i = -10; i <= 10; ++i) u[i] = s.at(i);
  const SiteVector gu = apply_generator(u, p);
  for (Site i = -9; i <= 9; ++i) {
    CHECK(gu[i] + (is_even(i) ? f(s.w_star) : 0.0) == doctest::Approx(0.0).scale(s.w_star).epsilon(1e-13));
  }
}

TEST_CASE("binomials") {
  CHECK(binomial(10, 3) == 120.0);
  CHECK(binomial(0, 0) == 1.0);
  CHECK(binomial(5, 7) == 0.0);
  CHECK(binomial(40, 20) == 137846528820.0);
  for (int n : {62, 63, 80}) {
    for (int k : {0, 1, n / 3, n / 2}) {
      const double lg = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
      CHECK(binomial(n, k) == doctest::Approx(lg).epsilon(1e-11));
    }
  }
}

TEST_CASE("powers of A: closed form examples") {
  const ModelParams p = reference();
  const double a = p.alpha, b = p.beta;
  CHECK(a_pow_entry(1, 0, 1, p) == doctest::Approx(b));
  CHECK(a_pow_entry(2, 1, 1, p) == doctest::Approx(2 * a * b));
  CHECK(a_pow_entry(3, 0, 1, p) == doctest::Approx(3 * a * b * b));
  CHECK(a_pow_entry(5, 0, 7, p) == 0.0);
  CHECK(a_pow_entry(2, 0, 1, p) == 0.0);
  CHECK(a_pow_oracle(1, 0, 1, p) == doctest::Approx(b));
  CHECK(a_pow_oracle(2, 0, 0, p) == doctest::Approx(2 * a * b));
  CHECK(a_pow_oracle(4, 0, 0, p) == doctest::Approx(a_pow_entry(4, 0, 0, p)).epsilon(1e-15));
  CHECK_THROWS_AS(a_pow_entry(0, 0, 0, p), std::invalid_argument);
}

TEST_CASE("powers of A: closed form against repeated multiplication") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 5; ++trial) {
    ModelParams p = reference();
    p.alpha = u(rng);
    p.beta = u(rng);
    for (int n = 1; n <= 20; ++n) {
      for (Site i = -25; i <= 25; ++i) {
        for (Site j = -25; j <= 25; ++j) {
          const double closed = a_pow_entry(n, i, j, p);
          const double oracle = a_pow_oracle(n, i, j, p);
          if (oracle == 0.0) {
            REQUIRE(closed == 0.0);
          } else {
            REQUIRE(std::abs(closed - oracle) <= 1e-12 * std::abs(oracle));
          }
        }
      }
    }
  }
}

TEST_CASE("powers of A: large n uses log-gamma binomials") {
  const ModelParams p{0.7, 1.3, 0.1, 0.2, 0.0};
  for (int n : {64, 65, 80}) {
    for (Site j : {Site{0}, Site{1}, Site{6}, Site{-9}}) {
      CHECK(a_pow_entry(n, 0, j, p) == doctest::Approx(a_pow_oracle(n, 0, j, p)).epsilon(1e-11));
    }
  }
}

TEST_CASE("heat kernel: small time and identity") {
  const ModelParams p = reference();
  CHECK(heat_kernel_entry(0.0, 3, 3, p, 1e-12) == 1.0);
  CHECK(heat_kernel_entry(0.0, 3, 4, p, 1e-12) == 0.0);
  CHECK(std::abs(heat_kernel_entry(1e-3, 0, 1, p, 1e-15) - 0.5e-3) < 1e-9);
  // (A^2)_{0,1} = 0 and (A^3)_{0,1} = 3 alpha beta^2, so the next term is
  // 3 alpha beta^2 t^3 / 6
  CHECK(heat_kernel_entry(1e-3, 0, 1, p, 1e-15) ==
        doctest::Approx(0.5e-3 + 3 * 0.25e-9 / 6.0).epsilon(1e-12));
  CHECK_THROWS_AS(heat_kernel_entry(1.0, 0, 0, p, 0.0), std::invalid_argument);
}

TEST_CASE("heat kernel against the dense matrix exponential") {
  for (const ModelParams& p : {reference(), ModelParams{0.3, 2.0, 0.1, 0.2, 0.0}}) {
    for (double t : {0.1, 1.0, 5.0}) {
      const DenseKernel dense(t, 80, p);
      for (Site i = -15; i <= 15; ++i) {
        double row_max = 0.0;
        for (Site j = -15; j <= 15; ++j) row_max = std::max(row_max, dense(i, j));
        for (Site j = -15; j <= 15; ++j) {
          const double series = heat_kernel_entry(t, i, j, p, 1e-15);
          CHECK(std::abs(series - dense(i, j)) <= 1e-12 * row_max);
          CHECK(series > 0.0);
        }
      }
    }
  }
}

TEST_CASE("heat kernel: shift symmetry at random points") {
  const ModelParams p{1.7, 0.4, 0.1, 0.2, 0.0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.01, 4.0);
  std::uniform_int_distribution<int> us(-20, 20);
  for (int k = 0; k < 200; ++k) {
    const double t = ut(rng);
    const Site i = us(rng), j = us(rng);
    CHECK(heat_kernel_entry(t, i + 2, j + 2, p, 1e-14) ==
          doctest::Approx(heat_kernel_entry(t, i, j, p, 1e-14)).epsilon(1e-14));
  }
}

TEST_CASE("heat kernel: truncation certificate") {
  const ModelParams p = reference();
  for (double t : {0.01, 0.5, 3.0}) {
    for (double tol : {1e-6, 1e-12}) {
      const int n = truncation_order(t, p, tol);
      CHECK(truncation_tail(t, p, n) < tol);
      if (n > 0) CHECK(truncation_tail(t, p, n - 1) >= tol);
      // the certificate dominates the exact tail of exp(2 M t)
      const double x = 2 * std::max(p.alpha, p.beta) * t;
      double exact = std::exp(x);
      double term = 1.0;
      for (int k = 0; k <= n; ++k) {
        exact -= term;
        term *= x / (k + 1);
      }
      CHECK(truncation_tail(t, p, n) >= exact - 1e-15 * std::exp(x));
    }
  }
}

TEST_CASE("heat kernel applied to vectors") {
  const ModelParams p = reference();
  const KernelBounds bounds(p);
  for (double t : {0.1, 1.0, 2.0}) {
    SiteVector ones({-200, 200}, 1.0);
    const SiteVector s = heat_kernel_apply(t, ones, {-20, 20}, p, 1e-13);
    for (Site i = -20; i <= 20; ++i) {
      CHECK(s[i] > 1.0);
      CHECK(s[i] <= bounds.c3(t));
    }
    const SiteVector z = heat_kernel_apply(t, SiteVector({-5, 5}), {-5, 5}, p, 1e-13);
    for (double v : z.values()) CHECK(v == 0.0);
  }
  const double tol = 1e-12;
  SiteVector e({-1, 1});
  e[0] = 1.0;
  const SiteVector col = heat_kernel_apply(0.5, e, {-12, 12}, p, tol);
  for (Site i = -12; i <= 12; ++i) {
    CHECK(std::abs(col[i] - heat_kernel_entry(0.5, i, 0, p, tol)) <= 2 * tol);
  }
}

TEST_CASE("kernel bounds") {
  const ModelParams p = reference();
  const KernelBounds b(p);
  CHECK(b.c1 == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(b.c2 == doctest::Approx(4.0));
  // C4 is increasing with C4(0+) = 1
  CHECK(b.c4(1e-9) == doctest::Approx(1.0).epsilon(1e-7));
  double prev = 1.0;
  for (double t = 0.01; t < 5; t += 0.05) {
    CHECK(b.c4(t) > prev);
    prev = b.c4(t);
  }
  // The corrected and original off-diagonal forms coincide at t = 1.
  for (Site l : {Site{1}, Site{2}, Site{7}}) {
    CHECK(b.off_diagonal(1.0, l, 1) == doctest::Approx(b.off_diagonal(1.0, l, 2)));
  }
}

TEST_CASE("kernel invariant suite") {
  for (const ModelParams& p :
       {reference(), ModelParams{0.3, 2.0, 0.1, 0.2, 0.0}, ModelParams{2.5, 2.5, 0.1, 0.2, 0.0}}) {
    for (const auto& c : verify_kernel(p)) {
      INFO(c.name << " at t = " << c.t << ": " << c.value << " vs " << c.limit);
      if (!c.informational) CHECK(c.passed);
    }
  }
}

TEST_CASE("off-diagonal bound with a t^2 factor is exceeded at small t") {
  // At |l| = 1 the kernel entry is t a_{i+1,i} + O(t^3), so a bound that is
  // O(t^2) there cannot hold as t -> 0. The t-linear form does.
  const ModelParams p = reference();
  const KernelBounds b(p);
  const double t = 0.1;
  const double k = heat_kernel_entry(t, 1, 0, p, 1e-15);
  CHECK(k > b.off_diagonal(t, 1, 2));
  CHECK(k <= b.off_diagonal(t, 1, 1));
}

TEST_CASE("row sums and column sums") {
  // Unequal at the same site when alpha != beta, equal after a one-site shift.
  const ModelParams p = reference();
  for (const auto& c : verify_kernel(p)) {
    if (c.name == "column_sum_vs_row_sum_same_site") CHECK(c.value > 1e-3);
    if (c.name == "column_sum_j_vs_row_sum_j_plus_1") CHECK(c.value < 1e-12);
  }
  // With alpha = beta, A is symmetric and the sums agree site by site.
  const ModelParams sym{0.8, 0.8, 0.1, 0.2, 0.0};
  for (const auto& c : verify_kernel(sym)) {
    if (c.name == "column_sum_vs_row_sum_same_site") CHECK(c.value < 1e-12);
  }
}

TEST_CASE("weighted norm") {
  SiteVector ones({-100, 100}, 1.0);
  CHECK(weighted_norm(ones) == doctest::Approx(1.0).epsilon(1e-15));
  SiteVector far({-100, 100});
  far[10] = 1.0;
  CHECK(weighted_norm(far) == doctest::Approx(std::ldexp(1.0, -9)).epsilon(1e-12));
}
