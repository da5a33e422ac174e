#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dircom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A value violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, std::size_t iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Largest node count accepted by the dense n x n representations.
inline constexpr std::size_t kMaxDenseNodes = 20000;

inline void require_dense_size(std::size_t n, const char* what) {
    if (n > kMaxDenseNodes) {
        throw ValidationError(std::string(what) + ": n = " + std::to_string(n) +
                              " exceeds the dense limit of " + std::to_string(kMaxDenseNodes));
    }
}

} // namespace dircom
