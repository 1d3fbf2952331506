#pragma once

#include <stdexcept>
#include <string>

namespace bns {

// Invalid parameters or arguments outside a function's domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A numerical procedure failed (non-convergence, overflow, divergence).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CouplingError : public NumericError {
public:
    using NumericError::NumericError;
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class EnvelopeError : public NumericError {
public:
    using NumericError::NumericError;
};

class InconsistencyError : public NumericError {
public:
    using NumericError::NumericError;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw DomainError(what);
}

} // namespace bns
