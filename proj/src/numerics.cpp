#include "lattice_kpp/numerics.hpp"

#include <algorithm>
#include <string>

#include "lattice_kpp/errors.hpp"

namespace lkpp::numerics {

namespace {
bool opposite(double a, double b) { return (a < 0 && b > 0) || (a > 0 && b < 0); }
}  // namespace

double bisect(const std::function<double(double)>& fn, double lo, double hi, double rel_tol,
              double abs_tol) {
  if (lo > hi) std::swap(lo, hi);
  double flo = fn(lo);
  double fhi = fn(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!opposite(flo, fhi)) {
    throw NumericalError("bisect: no sign change on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) return mid;
    if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi)) + abs_tol) return mid;
    const double fmid = fn(mid);
    if (fmid == 0.0) return mid;
    if (opposite(flo, fmid)) {
      hi = mid;
    } else {
      lo = mid;
      flo = fmid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

double newton_bisect(const std::function<std::pair<double, double>(double)>& fn, double lo,
                     double hi, double rel_tol) {
  if (lo > hi) std::swap(lo, hi);
  const double flo = fn(lo).first;
  const double fhi = fn(hi).first;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (!opposite(flo, fhi)) {
    throw NumericalError("newton_bisect: no sign change on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  const bool increasing = fhi > 0;
  double x = lo + 0.5 * (hi - lo);
  double prev_width = hi - lo;
  for (int iter = 0; iter < 500; ++iter) {
    auto [fx, dfx] = fn(x);
    if (fx == 0.0) return x;
    if ((fx > 0) == increasing) {
      hi = x;
    } else {
      lo = x;
    }
    const double width = hi - lo;
    if (width <= rel_tol * std::max(std::abs(lo), std::abs(hi))) return lo + 0.5 * width;

    double next = (dfx != 0.0) ? x - fx / dfx : lo + 0.5 * width;
    const bool inside = next > lo && next < hi;
    if (inside && std::abs(next - x) <= 0.25 * rel_tol * std::abs(x)) return next;
    // Newton left the bracket or the bracket is shrinking too slowly.
    if (!inside || width > 0.5 * prev_width) next = lo + 0.5 * width;
    if (next == x) return x;
    prev_width = width;
    x = next;
  }
  return x;
}

MinimumResult golden_section(const std::function<double(double)>& fn, double lo, double hi,
                             double width_tol) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > width_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
    if (c >= d) break;
  }
  const double x = fc < fd ? c : d;
  return {x, std::min(fc, fd)};
}

double expand_until(const std::function<double(double)>& fn, double hi, bool want_negative,
                    int max_doublings) {
  for (int k = 0; k < max_doublings; ++k) {
    const double v = fn(hi);
    if (want_negative ? v < 0 : v > 0) return hi;
    hi *= 2.0;
  }
  throw NumericalError("expand_until: no sign change after " + std::to_string(max_doublings) +
                       " doublings");
}

}  // namespace lkpp::numerics
