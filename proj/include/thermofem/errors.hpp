#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thermofem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// A material law left its admissible range (nonpositive sound speed, N1 <= 0, ...).
class ModelDegeneracy : public Error {
public:
    using Error::Error;
};

class FixedPointDivergence : public Error {
public:
    FixedPointDivergence(const std::string& what, double last_increment)
        : Error(what), last_increment_(last_increment) {}
    double last_increment() const noexcept { return last_increment_; }

private:
    double last_increment_;
};

/// Time stepping failed; step() is the index of the step being computed.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, std::size_t step)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace thermofem
