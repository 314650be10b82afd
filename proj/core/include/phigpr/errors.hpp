#pragma once

#include <stdexcept>
#include <string>

namespace phigpr {

/// Violated precondition or malformed input. CLI maps this family to exit code 1.
class ContractError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Config file syntax or schema problem.
class ConfigError : public ContractError {
public:
  using ContractError::ContractError;
};

/// Numerical failure at runtime. CLI maps this family to exit code 2.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Trajectory became non-finite during integration.
class IntegrationBlowup : public NumericalError {
public:
  IntegrationBlowup(const std::string& what, long step) : NumericalError(what), step_index(step) {}
  long step_index;
};

/// SPD factorization failed even after the jitter retry.
class IllConditionedError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Optimizer did not converge or every candidate fit failed.
class FitError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

}  // namespace phigpr
