#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>

namespace lkpp::numerics {

struct Bracket {
  double lo;
  double hi;
};

// Bisection on [lo, hi] where fn(lo) and fn(hi) have opposite signs. Stops when
// the bracket width falls below rel_tol * max(|lo|,|hi|) + abs_tol, or fn
// vanishes exactly. Throws NumericalError if there is no sign change.
double bisect(const std::function<double(double)>& fn, double lo, double hi,
              double rel_tol = 4 * std::numeric_limits<double>::epsilon(),
              double abs_tol = 0.0);

// Safeguarded Newton: Newton steps that leave the current bracket, or fail to
// halve it, fall back to bisection. fn returns (value, derivative).
double newton_bisect(const std::function<std::pair<double, double>(double)>& fn, double lo,
                     double hi, double rel_tol = 4 * std::numeric_limits<double>::epsilon());

struct MinimumResult {
  double x;
  double value;
};

// Golden-section search for a minimum of a unimodal fn on [lo, hi]. Iterates
// until the bracket width is below width_tol.
MinimumResult golden_section(const std::function<double(double)>& fn, double lo, double hi,
                             double width_tol);

// Expand hi by repeated doubling until fn(hi) has the requested sign.
// Throws NumericalError after max_doublings.
double expand_until(const std::function<double(double)>& fn, double hi, bool want_negative,
                    int max_doublings = 200);

}  // namespace lkpp::numerics
