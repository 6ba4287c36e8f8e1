#pragma once

#include <string>
#include <vector>

#include "lattice_kpp/model.hpp"
#include "lattice_kpp/site_vector.hpp"

namespace lkpp::kernel {

// One line of the kernel invariant report. A check passes when value <= limit,
// except positivity, which needs value > limit. Informational lines are
// reported without a verdict.
struct KernelCheck {
  double t = 0.0;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = true;
  bool informational = false;
};

struct KernelSuiteOptions {
  std::vector<double> times{0.1, 1.0, 5.0};
  Site center = 0;
  int half_width = 15;  // window width 2 half_width + 1
  double tol = 1e-14;   // series truncation tolerance
  double fd_step = 1e-4;
  double semigroup_tol = 1e-8;
  double generator_tol = 1e-6;
};

// Weighted sup norm sum_{k >= 1} 2^{-k} max_{|i| <= k} |phi(i)|, truncated
// where the remaining weight is below 1e-17 of the total.
double weighted_norm(const SiteVector& phi);

// Strong positivity, 2-periodic shift symmetry, entry bounds, row-sum bound,
// weighted-norm bound, semigroup and generator checks at each time. Also
// reports the off-diagonal bound in its originally printed form and the
// row-sum versus column-sum comparison.
std::vector<KernelCheck> verify_kernel(const ModelParams& params,
                                       const KernelSuiteOptions& options = {});

}  // namespace lkpp::kernel
