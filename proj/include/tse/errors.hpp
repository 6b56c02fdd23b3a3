#pragma once

#include <stdexcept>
#include <string>

namespace tse {

/// A physical quantity left its admissible range (density outside
/// [0, rho_max], speed outside [0, v_free], zero-norm reference field).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid user configuration: CFL violation, oversized sample request,
/// unknown config key, empty sweep lists.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke an API precondition (shape mismatch, empty set, tape not
/// rooted at a scalar).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Non-finite value produced during evaluation or training.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tse
