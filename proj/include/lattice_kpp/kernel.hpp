#pragma once

#include <cstdint>
#include <vector>

#include "lattice_kpp/model.hpp"
#include "lattice_kpp/site_vector.hpp"

namespace lkpp::kernel {

enum class OperatorKind { A, B, A_plus_B };

// Entry (i, j) of the infinite band operators:
//   A: a_{i,i+-1} = beta (i even), alpha (i odd)
//   B: b_{ii} = -2 beta - gamma (i even), -2 alpha - eta (i odd)
double entry(OperatorKind kind, Site i, Site j, const ModelParams& params);

inline double a_entry(Site i, Site j, const ModelParams& params) {
  return entry(OperatorKind::A, i, j, params);
}

// Linear part of the lattice system on the window of phi, zero outside:
//   even i: alpha (phi_{i-1} + phi_{i+1}) - (2 beta + gamma) phi_i
//   odd i:  beta (phi_{i-1} + phi_{i+1}) - (2 alpha + eta) phi_i
// The coupling follows the model rows, so it is the transpose of the band A
// above plus B (A puts beta in even rows).
SiteVector apply_generator(const SiteVector& phi, const ModelParams& params);

// Binomial coefficient. Exact integer arithmetic for n <= 62, log-gamma above.
double binomial(int n, int k);

// (A^n)_{i,j} from the closed-form expression, n >= 1.
double a_pow_entry(int n, Site i, Site j, const ModelParams& params);

// (A^n)_{i,j} by n repeated band multiplications of the unit vector e_j.
double a_pow_oracle(int n, Site i, Site j, const ModelParams& params);

struct KernelBounds {
  double alpha_beta = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  explicit KernelBounds(const ModelParams& params);

  // Row-sum bound: 1 + c1 t e^{ab t^2} + c2 (e^{ab t^2} - 1)
  //               + (c2 + c1 t^2)(4 ab t^2 + 2) e^{ab t^2}.
  double c3(double t) const;
  // Norm bound in the weighted sup norm: 1 + (c1 t + 8 c1 t^2) e^{ab t^2}
  //                                       + 9 c2 (e^{ab t^2} - 1).
  double c4(double t) const;
  // Diagonal entry bound 1 + c1 t e^{ab t^2} + c2 (e^{ab t^2} - 1).
  double diagonal(double t) const;
  // Off-diagonal bound for (e^{tA})_{i+l,i}, l != 0:
  //   c1 t^p sum_{k >= (|l|-1)/2} (ab t^2)^k / k! + c2 sum_{k >= |l|/2} (ab t^2)^k / k!
  // where p = 1 carries the single factor of t from the odd-power terms.
  // t_power = 2 gives the form printed with the original lemma, which fails
  // for small t at |l| = 1 (the first-order term t a_{i+1,i} is O(t)).
  double off_diagonal(double t, Site offset, int t_power = 1) const;
};

// Smallest N with sum_{n > N} x^n / n! < tol for x = 2 max(alpha, beta) t.
int truncation_order(double t, const ModelParams& params, double tol);
// Upper bound on the discarded tail at order N.
double truncation_tail(double t, const ModelParams& params, int order);

// (e^{tA})_{i,j} by the power series truncated with tail below tol.
double heat_kernel_entry(double t, Site i, Site j, const ModelParams& params, double tol);

// Rows i in out_range of e^{tA} applied to phi (zero outside its window).
// Each output entry is within tol * max|phi| of the untruncated series.
SiteVector heat_kernel_apply(double t, const SiteVector& phi, SiteRange out_range,
                             const ModelParams& params, double tol);

// Dense block (e^{tA})_{i,j} for |i - center|, |j - center| <= half_width.
struct KernelWindow {
  double t = 0.0;
  Site center = 0;
  int half_width = 0;
  std::vector<double> entries;  // row-major

  SiteRange range() const { return {center - half_width, center + half_width}; }
  double operator()(Site i, Site j) const {
    const auto n = range().size();
    const Site lo = center - half_width;
    return entries[static_cast<std::size_t>(i - lo) * n + static_cast<std::size_t>(j - lo)];
  }
};

KernelWindow heat_kernel_window(double t, Site center, int half_width, const ModelParams& params,
                                double tol);

}  // namespace lkpp::kernel
