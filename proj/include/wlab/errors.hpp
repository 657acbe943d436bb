#pragma once

#include <stdexcept>
#include <string>

namespace wlab {

/// Input violated a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotPositiveDefiniteError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnsupportedDimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A numerical routine failed to converge or produced an inconsistent result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an estimator's internal consistency check fails (e.g. the
/// mean importance weight of a density that must integrate to one).
class SelfConsistencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

}  // namespace wlab
