#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lattice_kpp/model.hpp"

namespace lkpp::dispersion {

// F(lambda, mu, beta) = -(lambda + 2 beta + gamma)
//                       + alpha beta (e^mu + e^-mu)^2 / (lambda + 2 alpha + eta)
//                       + f'(0) e^{-lambda tau}
// The beta argument overrides params.beta. Throws std::domain_error at or
// below the pole lambda = -(2 alpha + eta).
double dispersion_F(double lambda, double mu, double beta, const ModelParams& params,
                    const BirthLaw& birth);

// Partial derivatives of F.
double dF_dlambda(double lambda, double mu, double beta, const ModelParams& params,
                  const BirthLaw& birth);
double dF_dmu(double lambda, double mu, double beta, const ModelParams& params);
double dF_dbeta(double lambda, double mu, const ModelParams& params);

// Unique lambda > 0 with F(lambda, mu, beta) = 0. Throws RegimeError if
// F(0, mu, beta) <= 0.
double lambda_of_mu(double mu, double beta, const ModelParams& params, const BirthLaw& birth);

struct SpeedOptions {
  double mu_min = 1e-3;
  double mu_max = 30.0;
  std::size_t grid_points = 300;
  double golden_width = 1e-10;
  // If the grid minimum sits on the lower end of the range, the range is
  // extended down by factors of 1000 until this floor.
  double mu_floor = 1e-12;
};

struct DispersionResult {
  double c_star = 0.0;
  double mu_star = 0.0;
  double lambda_star_at_min = 0.0;
  double residual_F = 0.0;
  double residual_stationarity = 0.0;
  // The grid scan found more than one local minimum of lambda(mu)/mu with
  // values more than 1e-6 apart; the global one is returned.
  bool multiple_minima = false;
};

// c* = min_{mu > 0} lambda(mu)/mu. Throws RegimeError unless beta in (0, beta0).
DispersionResult spreading_speed(double beta, const ModelParams& params, const BirthLaw& birth,
                                 const SpeedOptions& options = {});

// Unique positive root of -(lambda + gamma) + f'(0) e^{-lambda tau} = 0.
// Throws RegimeError if f'(0) <= gamma.
double lambda_star(const ModelParams& params, const BirthLaw& birth);

// h(mu) = mu (e^mu - e^-mu) and its inverse on [0, inf).
double h_eval(double mu);
double h_inverse(double y);

// C(lambda, beta) = lambda / sqrt(2 alpha (lambda + 2 alpha + eta))
//   + lambda (1 + tau f'(0) e^{-lambda tau}) sqrt(lambda + 2 alpha + eta) / (beta sqrt(8 alpha))
double c_coefficient(double lambda, double beta, const ModelParams& params, const BirthLaw& birth);

struct OptimalDispersal {
  double beta1 = 0.0;
  double lambda_star = 0.0;
  double mu_bar = 0.0;
  double c_max = 0.0;
  double beta0 = 0.0;
  double residual_G = 0.0;
};

// G(beta) = h^{-1}(C(lambda*, beta)) - mu_bar, mu_bar = acosh(sqrt((lambda* + 2 alpha + eta) / (2 alpha))).
double optimal_beta_residual(double beta, const ModelParams& params, const BirthLaw& birth);

// The dispersal rate beta1 in (0, beta0) maximising c*, with c_max = lambda*/mu_bar.
// Throws NumericalError if G has no sign change on (eps, beta0 - eps).
OptimalDispersal optimal_beta(const ModelParams& params, const BirthLaw& birth);

enum class Regime { kpp_ok, beta_out_of_range, no_positive_root };
std::string_view to_string(Regime regime);

enum class SweepParameter { beta, eta, fprime0 };
std::string_view to_string(SweepParameter parameter);
SweepParameter parse_sweep_parameter(std::string_view name);

struct SweepRow {
  double value = 0.0;
  double c_star = 0.0;
  double mu_star = 0.0;
  Regime regime = Regime::kpp_ok;
};

struct SweepTable {
  SweepParameter parameter = SweepParameter::beta;
  std::vector<SweepRow> rows;
};

// Parameters and birth law with one sweep coordinate replaced.
void apply_sweep_value(SweepParameter parameter, double value, ModelParams& params,
                       BirthLaw& birth);

// Evaluates c* at every grid value, in parallel over `threads` workers (0 =
// hardware concurrency). Rows keep grid order. Points outside the invasion
// regime are flagged, not dropped.
SweepTable sweep(SweepParameter parameter, const std::vector<double>& grid,
                 const ModelParams& params, const BirthLaw& birth, std::size_t threads = 0,
                 const SpeedOptions& options = {});

}  // namespace lkpp::dispersion
