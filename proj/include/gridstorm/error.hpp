#pragma once

#include <stdexcept>
#include <string>

namespace gridstorm {

// Base for all library errors. Callers that only care about "it failed"
// catch this; the CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (CSV/JSON). Carries the 1-based line when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Caller broke a documented precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

// A state update produced NaN/Inf.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Iterative solver failed to converge.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double worst_mismatch)
        : Error(what), worst_mismatch_(worst_mismatch) {}
    [[nodiscard]] double worst_mismatch() const noexcept { return worst_mismatch_; }

private:
    double worst_mismatch_;
};

// Filesystem or schema-version problems.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gridstorm
