#pragma once

#include <stdexcept>
#include <string>

namespace missinfo {

// Bad input: schema mismatch, invariant violation, unsupported option.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A model does not provide what an operation needs.
class UnsupportedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Likelihood-ratio moments are too heavy-tailed to estimate reliably.
class HeavyTailError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace missinfo
