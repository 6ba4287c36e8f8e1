#pragma once

#include <stdexcept>
#include <string>

namespace lkpp {

// Parameters outside the invasion regime: f'(0) <= Gamma, f'(0) <= gamma,
// beta >= beta0, no positive equilibrium.
class RegimeError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// A bracketing search failed to find a sign change, or an iteration did not
// converge.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The front came within the safety margin of the truncated window.
class ContaminationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The integrated state left the invariant region or blew up.
class InstabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or unknown configuration input.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lkpp
