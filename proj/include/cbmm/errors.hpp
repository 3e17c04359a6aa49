#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cbmm {

/// Bad argument to a library call (dimension mismatch, infeasible start,
/// invalid schedule, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures detected while an iterative method is running.
/// `iteration` is 1-based; 0 means "outside of a solver loop".
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t iteration)
        : std::runtime_error(what), iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// A gradient handed to a betting learner exceeded the unit norm bound.
/// Almost always means the scaling constant G is wrong for the problem.
class ScalingViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Bettor wealth dropped to zero or below.
class WealthExhausted : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Problems with input data files.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// LIBSVM text could not be read. `line` is 1-based.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Syntactically valid numbers in an invalid layout (non-increasing or
/// zero feature index).
class FormatError : public ParseError {
public:
    using ParseError::ParseError;
};

class EmptyDatasetError : public DataError {
public:
    EmptyDatasetError() : DataError("dataset contains no samples") {}
};

class RemapError : public DataError {
public:
    using DataError::DataError;
};

class InfiniteDivergence : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Run configuration rejected before any work is done.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace cbmm
