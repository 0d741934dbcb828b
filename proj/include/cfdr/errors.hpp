#pragma once

#include <stdexcept>
#include <string>

namespace cfdr {

// Base of every error the toolkit raises. Each condition named in the public
// contracts has its own subclass so callers (and the CLI exit-code mapping)
// can dispatch on type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied something invalid; the CLI maps these to exit status 2.
class UsageError : public Error {
public:
    using Error::Error;
};

class NonFiniteOutput : public Error {
public:
    using Error::Error;
};
class NonFiniteStatistic : public Error {
public:
    using Error::Error;
};
class EmptyNullSample : public Error {
public:
    using Error::Error;
};
class InvalidAlpha : public UsageError {
public:
    using UsageError::UsageError;
};
class InvalidPValue : public Error {
public:
    using Error::Error;
};
class DimensionMismatch : public Error {
public:
    using Error::Error;
};
class InvalidDimension : public UsageError {
public:
    using UsageError::UsageError;
};
class IndexOutOfRange : public UsageError {
public:
    using UsageError::UsageError;
};
class EmptySubset : public UsageError {
public:
    using UsageError::UsageError;
};
class OverlappingSubsets : public UsageError {
public:
    using UsageError::UsageError;
};
class NotDifferentiable : public Error {
public:
    using Error::Error;
};

class TrainingDidNotConverge : public Error {
public:
    TrainingDidNotConverge(const std::string& what, double final_relative_mse)
        : Error(what), final_relative_mse_(final_relative_mse) {}
    double final_relative_mse() const noexcept { return final_relative_mse_; }

private:
    double final_relative_mse_;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};
class ModelError : public Error {
public:
    using Error::Error;
};
class Timeout : public Error {
public:
    using Error::Error;
};

// Malformed input file; carries the 1-based line number of the offending row.
class ParseError : public UsageError {
public:
    ParseError(const std::string& what, std::size_t line) : UsageError(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace cfdr
