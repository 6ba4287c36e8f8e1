#include "lattice_kpp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lkpp::kernel {

namespace {

constexpr int kExactBinomialLimit = 62;
__extension__ using u128 = unsigned __int128;

// Parity case analysis of (beta/alpha)^{((-1)^{i+n} + (-1)^i)/4}: the exponent
// is 1/2 for (i even, n even), -1/2 for (i odd, n even) and 0 for n odd.
double parity_prefactor(int n, Site i, const ModelParams& p) {
  if (n % 2 != 0) return 1.0;
  return is_even(i) ? std::sqrt(p.beta / p.alpha) : std::sqrt(p.alpha / p.beta);
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// sum_{m=0}^{n-1} C(n-1, m) a_{i-(n-1-2m), j}. Only rows k = j +- 1 of A have
// a nonzero entry in column j, so at most two terms survive. Returns the
// surviving (binomial index, a-entry) pairs.
struct BandTerm {
  int m;
  double a;
};

int band_terms(int n, Site i, Site j, const ModelParams& p, BandTerm out[2]) {
  int count = 0;
  for (Site s : {Site{-1}, Site{1}}) {
    const Site k = j + s;
    // k = i - (n - 1 - 2m)  =>  2m = k - i + n - 1
    const Site twice_m = k - i + n - 1;
    if (twice_m < 0 || twice_m % 2 != 0) continue;
    const Site m = twice_m / 2;
    if (m > n - 1) continue;
    out[count++] = {static_cast<int>(m), is_even(k) ? p.beta : p.alpha};
  }
  return count;
}

// log (A^n)_{i,j}, or -inf when the entry vanishes.
double log_a_pow(int n, Site i, Site j, const ModelParams& p) {
  BandTerm terms[2];
  const int count = band_terms(n, i, j, p, terms);
  if (count == 0) return -std::numeric_limits<double>::infinity();
  const double log_pref =
      std::log(parity_prefactor(n, i, p)) + 0.5 * (n - 1) * std::log(p.alpha * p.beta);
  if (n - 1 <= kExactBinomialLimit) {
    double sum = 0.0;
    for (int c = 0; c < count; ++c) sum += binomial(n - 1, terms[c].m) * terms[c].a;
    return log_pref + std::log(sum);
  }
  double logs[2];
  for (int c = 0; c < count; ++c) logs[c] = log_binomial(n - 1, terms[c].m) + std::log(terms[c].a);
  if (count == 1) return log_pref + logs[0];
  const double hi = std::max(logs[0], logs[1]);
  return log_pref + hi + std::log(std::exp(logs[0] - hi) + std::exp(logs[1] - hi));
}

// sum_{k >= k0} y^k / k!
double exp_tail(double y, Site k0) {
  if (k0 <= 0) return std::exp(y);
  if (y <= 0.0) return 0.0;
  double term = std::exp(static_cast<double>(k0) * std::log(y) - std::lgamma(k0 + 1.0));
  double sum = 0.0;
  for (Site k = k0; k < k0 + 100000; ++k) {
    sum += term;
    term *= y / static_cast<double>(k + 1);
    if (term < 1e-18 * sum && static_cast<double>(k) > y) break;
  }
  return sum;
}

Site ceil_half(Site v) { return v <= 0 ? 0 : (v + 1) / 2; }

void check_tol(double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("heat kernel: tol must be > 0");
}

}  // namespace

double entry(OperatorKind kind, Site i, Site j, const ModelParams& p) {
  const bool near = (i - j == 1) || (j - i == 1);
  const double a = near ? (is_even(i) ? p.beta : p.alpha) : 0.0;
  const double b = (i == j) ? (is_even(i) ? -2.0 * p.beta - p.gamma : -2.0 * p.alpha - p.eta)
                            : 0.0;
  switch (kind) {
    case OperatorKind::A: return a;
    case OperatorKind::B: return b;
    case OperatorKind::A_plus_B: return a + b;
  }
  return 0.0;
}

SiteVector apply_generator(const SiteVector& phi, const ModelParams& p) {
  if (phi.size() < 1) throw std::invalid_argument("apply_generator: empty window");
  SiteVector out(phi.range());
  for (Site i = phi.first(); i <= phi.last(); ++i) {
    const double nbr = phi.at_or_zero(i - 1) + phi.at_or_zero(i + 1);
    out[i] = is_even(i) ? p.alpha * nbr - (2.0 * p.beta + p.gamma) * phi[i]
                        : p.beta * nbr - (2.0 * p.alpha + p.eta) * phi[i];
  }
  return out;
}

double binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0.0;
  k = std::min(k, n - k);
  if (n <= kExactBinomialLimit) {
    u128 c = 1;
    for (int r = 1; r <= k; ++r) c = c * static_cast<unsigned>(n - k + r) / static_cast<unsigned>(r);
    return static_cast<double>(c);
  }
  return std::exp(log_binomial(n, k));
}

double a_pow_entry(int n, Site i, Site j, const ModelParams& p) {
  if (n < 1) throw std::invalid_argument("a_pow_entry: n must be >= 1");
  const Site dist = i > j ? i - j : j - i;
  if (dist > n) return 0.0;
  BandTerm terms[2];
  const int count = band_terms(n, i, j, p, terms);
  if (count == 0) return 0.0;
  if (n - 1 > kExactBinomialLimit) return std::exp(log_a_pow(n, i, j, p));
  double sum = 0.0;
  for (int c = 0; c < count; ++c) sum += binomial(n - 1, terms[c].m) * terms[c].a;
  return parity_prefactor(n, i, p) * std::pow(p.alpha * p.beta, 0.5 * (n - 1)) * sum;
}

double a_pow_oracle(int n, Site i, Site j, const ModelParams& p) {
  if (n < 1) throw std::invalid_argument("a_pow_oracle: n must be >= 1");
  const Site half = n + 2;
  const SiteRange window{j - half, j + half};
  if (!window.contains(i)) return 0.0;
  SiteVector v(window);
  v[j] = 1.0;
  for (int step = 0; step < n; ++step) {
    SiteVector next(window);
    for (Site r = window.lo; r <= window.hi; ++r) {
      next[r] = a_entry(r, r - 1, p) * v.at_or_zero(r - 1) + a_entry(r, r + 1, p) * v.at_or_zero(r + 1);
    }
    v = std::move(next);
  }
  return v[i];
}

KernelBounds::KernelBounds(const ModelParams& p) : alpha_beta(p.alpha * p.beta) {
  c1 = 2.0 * std::max(std::sqrt(p.beta / p.alpha), std::sqrt(p.alpha / p.beta)) *
       std::max(p.alpha, p.beta);
  c2 = c1 / std::sqrt(alpha_beta);
}

double KernelBounds::diagonal(double t) const {
  const double e = std::exp(alpha_beta * t * t);
  return 1.0 + c1 * t * e + c2 * (e - 1.0);
}

double KernelBounds::c3(double t) const {
  const double y = alpha_beta * t * t;
  const double e = std::exp(y);
  return diagonal(t) + (c2 + c1 * t * t) * (4.0 * y + 2.0) * e;
}

double KernelBounds::c4(double t) const {
  const double e = std::exp(alpha_beta * t * t);
  return 1.0 + (c1 * t + 8.0 * c1 * t * t) * e + 9.0 * c2 * (e - 1.0);
}

double KernelBounds::off_diagonal(double t, Site offset, int t_power) const {
  const Site l = offset < 0 ? -offset : offset;
  const double y = alpha_beta * t * t;
  return c1 * std::pow(t, t_power) * exp_tail(y, ceil_half(l - 1)) + c2 * exp_tail(y, ceil_half(l));
}

double truncation_tail(double t, const ModelParams& p, int order) {
  const double x = 2.0 * std::max(p.alpha, p.beta) * t;
  if (x == 0.0) return 0.0;
  const int n = order + 1;
  const double first = std::exp(n * std::log(x) - std::lgamma(n + 1.0));
  const double ratio = x / (n + 1.0);
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return first / (1.0 - ratio);
}

int truncation_order(double t, const ModelParams& p, double tol) {
  check_tol(tol);
  if (t < 0.0) throw std::invalid_argument("heat kernel: t must be >= 0");
  int order = 0;
  while (truncation_tail(t, p, order) >= tol) {
    if (++order > 100000) throw std::invalid_argument("heat kernel: t too large for series");
  }
  return order;
}

double heat_kernel_entry(double t, Site i, Site j, const ModelParams& p, double tol) {
  const int order = truncation_order(t, p, tol);
  if (t == 0.0) return i == j ? 1.0 : 0.0;
  const Site dist = i > j ? i - j : j - i;
  // The first nonzero power is n = |i - j|; keep it even when the certificate
  // allows stopping earlier so that positivity is preserved.
  const Site last = std::max<Site>(order, dist);
  const double log_t = std::log(t);
  double sum = (i == j) ? 1.0 : 0.0;
  // A is bipartite: (A^n)_{i,j} vanishes unless n and |i - j| share parity.
  for (Site n = dist == 0 ? 2 : dist; n <= last; n += 2) {
    const double la = log_a_pow(static_cast<int>(n), i, j, p);
    if (!std::isfinite(la)) continue;
    sum += std::exp(static_cast<double>(n) * log_t - std::lgamma(n + 1.0) + la);
  }
  return sum;
}

SiteVector heat_kernel_apply(double t, const SiteVector& phi, SiteRange out_range,
                             const ModelParams& p, double tol) {
  const int order = truncation_order(t, p, tol);
  if (out_range.hi < out_range.lo) throw std::invalid_argument("heat_kernel_apply: empty range");
  // A^n couples sites at distance <= n, so padding by the order captures every
  // retained term.
  const SiteRange work{out_range.lo - order, out_range.hi + order};
  SiteVector term(work);
  for (Site i = work.lo; i <= work.hi; ++i) term[i] = phi.at_or_zero(i);
  SiteVector sum = term;
  for (int n = 1; n <= order; ++n) {
    SiteVector next(work);
    const double scale = t / n;
    for (Site i = work.lo; i <= work.hi; ++i) {
      next[i] = scale * a_entry(i, i - 1, p) * (term.at_or_zero(i - 1) + term.at_or_zero(i + 1));
    }
    term = std::move(next);
    for (Site i = work.lo; i <= work.hi; ++i) sum[i] += term[i];
  }
  SiteVector out(out_range);
  for (Site i = out_range.lo; i <= out_range.hi; ++i) out[i] = sum[i];
  return out;
}

KernelWindow heat_kernel_window(double t, Site center, int half_width, const ModelParams& p,
                                double tol) {
  if (half_width < 0) throw std::invalid_argument("heat_kernel_window: negative half_width");
  KernelWindow w;
  w.t = t;
  w.center = center;
  w.half_width = half_width;
  const SiteRange r = w.range();
  w.entries.reserve(r.size() * r.size());
  for (Site i = r.lo; i <= r.hi; ++i) {
    for (Site j = r.lo; j <= r.hi; ++j) w.entries.push_back(heat_kernel_entry(t, i, j, p, tol));
  }
  return w;
}

}  // namespace lkpp::kernel
