#include "lattice_kpp/kernel_suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lattice_kpp/kernel.hpp"

namespace lkpp::kernel {

namespace {

constexpr int kNormDepth = 60;  // 2^-60 < 1e-17

KernelCheck upper(double t, std::string name, double value, double limit) {
  return {t, std::move(name), value, limit, value <= limit, false};
}

KernelCheck info(double t, std::string name, double value, double limit) {
  return {t, std::move(name), value, limit, true, true};
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Sums of e^{tA} over rows i in out_range: (e^{tA} 1)_i.
SiteVector row_sums(double t, SiteRange out_range, const ModelParams& p, double tol) {
  const int order = truncation_order(t, p, tol);
  SiteVector ones({out_range.lo - order - 2, out_range.hi + order + 2}, 1.0);
  return heat_kernel_apply(t, ones, out_range, p, tol);
}

}  // namespace

double weighted_norm(const SiteVector& phi) {
  double sum = 0.0;
  double running = std::abs(phi.at_or_zero(0));
  for (int k = 1; k <= kNormDepth; ++k) {
    running = std::max({running, std::abs(phi.at_or_zero(k)), std::abs(phi.at_or_zero(-k))});
    sum += std::ldexp(running, -k);
  }
  return sum;
}

std::vector<KernelCheck> verify_kernel(const ModelParams& p, const KernelSuiteOptions& opt) {
  p.validate();
  if (opt.half_width < 1) throw std::invalid_argument("verify_kernel: half_width must be >= 1");
  const KernelBounds bounds(p);
  std::vector<KernelCheck> out;

  for (const double t : opt.times) {
    if (!(t > opt.fd_step)) throw std::invalid_argument("verify_kernel: times must exceed fd_step");
    const KernelWindow w = heat_kernel_window(t, opt.center, opt.half_width, p, opt.tol);
    const SiteRange r = w.range();
    const int order = truncation_order(t, p, opt.tol);

    double min_entry = std::numeric_limits<double>::infinity();
    double shift = 0.0;
    double diag = 0.0;
    double off = 0.0;
    double off_printed = 0.0;
    for (Site i = r.lo; i <= r.hi; ++i) {
      for (Site j = r.lo; j <= r.hi; ++j) {
        const double k = w(i, j);
        min_entry = std::min(min_entry, k);
        shift = std::max(shift, rel_diff(k, heat_kernel_entry(t, i + 2, j + 2, p, opt.tol)));
        if (i == j) {
          diag = std::max(diag, k / bounds.diagonal(t));
        } else {
          off = std::max(off, k / bounds.off_diagonal(t, i - j, 1));
          off_printed = std::max(off_printed, k / bounds.off_diagonal(t, i - j, 2));
        }
      }
    }
    out.push_back({t, "strong_positivity", min_entry, 0.0, min_entry > 0.0, false});
    out.push_back(upper(t, "shift_symmetry", shift, 1e-12));
    out.push_back(upper(t, "diagonal_bound_ratio", diag, 1.0));
    out.push_back(upper(t, "off_diagonal_bound_ratio", off, 1.0));
    out.push_back(info(t, "off_diagonal_bound_ratio_t_squared", off_printed, 1.0));

    // Row sums against C3(t), and against column sums of the same kernel.
    const SiteVector rows = row_sums(t, {r.lo, r.hi + 1}, p, opt.tol);
    double row_ratio = 0.0;
    for (Site i = r.lo; i <= r.hi; ++i) row_ratio = std::max(row_ratio, rows[i] / bounds.c3(t));
    out.push_back(upper(t, "row_sum_c3_ratio", row_ratio, 1.0));

    double same_site = 0.0;
    double shifted = 0.0;
    const Site reach = order + 2;
    for (Site j = r.lo; j <= r.hi; ++j) {
      double col = 0.0;
      for (Site i = j - reach; i <= j + reach; ++i) col += heat_kernel_entry(t, i, j, p, opt.tol);
      same_site = std::max(same_site, rel_diff(col, rows[j]));
      shifted = std::max(shifted, rel_diff(col, rows[j + 1]));
    }
    out.push_back(info(t, "column_sum_vs_row_sum_same_site", same_site, 0.0));
    out.push_back(upper(t, "column_sum_j_vs_row_sum_j_plus_1", shifted, 1e-10));

    // Weighted-norm bound on a few bounded test functions.
    {
      const Site span = kNormDepth + order + 2;
      const SiteRange in{-span, span};
      const SiteRange norm_range{-kNormDepth, kNormDepth};
      std::vector<SiteVector> probes;
      probes.emplace_back(in, 1.0);
      for (Site site : {Site{0}, Site{1}, Site{10}}) {
        SiteVector d(in);
        d[site] = 1.0;
        probes.push_back(std::move(d));
      }
      SiteVector alt(in);
      for (Site i = in.lo; i <= in.hi; ++i) alt[i] = is_even(i) ? 1.0 : -1.0;
      probes.push_back(std::move(alt));
      double worst = 0.0;
      for (const auto& phi : probes) {
        const SiteVector image = heat_kernel_apply(t, phi, norm_range, p, opt.tol);
        worst = std::max(worst, weighted_norm(image) / weighted_norm(phi));
      }
      out.push_back(upper(t, "weighted_norm_c4_ratio", worst / bounds.c4(t), 1.0));
    }

    // Semigroup: e^{tA} = e^{(t/2)A} e^{(t/2)A}, column by column. Entries
    // grow like e^{2 max(alpha, beta) t}, so the error is taken relative to
    // max(1, entry); an absolute 1e-8 is below round-off once entries pass 1e8.
    {
      const double half = 0.5 * t;
      const int half_order = truncation_order(half, p, opt.tol);
      const SiteRange mid{r.lo - half_order - 2, r.hi + half_order + 2};
      double worst = 0.0;
      for (Site j = r.lo; j <= r.hi; ++j) {
        SiteVector e(mid);
        e[j] = 1.0;
        const SiteVector v = heat_kernel_apply(half, e, mid, p, opt.tol);
        const SiteVector u = heat_kernel_apply(half, v, r, p, opt.tol);
        for (Site i = r.lo; i <= r.hi; ++i) {
          worst = std::max(worst, std::abs(u[i] - w(i, j)) / std::max(1.0, w(i, j)));
        }
      }
      out.push_back(upper(t, "semigroup_scaled_error", worst, opt.semigroup_tol));
    }

    // Generator: d/dt e^{tA} = A e^{tA}, by central differences. The error is
    // scaled by max(1, |A e^{tA}|) since the difference quotient carries a
    // truncation error proportional to the third derivative.
    {
      const double h = opt.fd_step;
      double worst = 0.0;
      for (Site i = r.lo; i <= r.hi; ++i) {
        for (Site j = r.lo; j <= r.hi; ++j) {
          const double fd = (heat_kernel_entry(t + h, i, j, p, opt.tol) -
                             heat_kernel_entry(t - h, i, j, p, opt.tol)) / (2.0 * h);
          const double ak = a_entry(i, i - 1, p) * (heat_kernel_entry(t, i - 1, j, p, opt.tol) +
                                                    heat_kernel_entry(t, i + 1, j, p, opt.tol));
          worst = std::max(worst, std::abs(fd - ak) / std::max(1.0, std::abs(ak)));
        }
      }
      out.push_back(upper(t, "generator_fd_scaled_error", worst, opt.generator_tol));
    }
  }
  return out;
}

}  // namespace lkpp::kernel
