#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace iadmm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension mismatches and malformed inputs.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// A parameter lies outside its admissible range.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Evaluation outside the domain of a function (e.g. +inf objective).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Iteration failures: non-finite values, iteration caps, line-search divergence.
///
/// Carries the outer iteration k, the block index i and the inner counter l
/// when they are known, plus the best estimate for iterative estimators.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what), message_(what) {}

    std::optional<long> k;
    std::optional<long> block;
    std::optional<long> l;
    std::optional<double> estimate;

    const std::string& message() const noexcept { return message_; }

    /// Copy of this error with outer context attached.
    NumericError with_context(long outer_k, long block_index) const {
        NumericError e(message_ + " [k=" + std::to_string(outer_k) +
                       ", block=" + std::to_string(block_index) +
                       (l ? ", l=" + std::to_string(*l) : std::string()) + "]");
        e.message_ = message_;
        e.k = outer_k;
        e.block = block_index;
        e.l = l;
        e.estimate = estimate;
        return e;
    }

private:
    std::string message_;
};

} // namespace iadmm
