#pragma once

#include <stdexcept>
#include <string>

namespace motional {

/// Raised when a numerical procedure fails: NaN blow-up, non-convergence.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double last_residual = 0.0)
        : std::runtime_error(what), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Malformed input file or config; carries a 1-based line/row number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace motional
