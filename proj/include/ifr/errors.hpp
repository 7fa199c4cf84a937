#pragma once

#include <stdexcept>
#include <string>

namespace ifr {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// No IFR distribution satisfies the requested moment constraint.
class Infeasible : public Error {
public:
    using Error::Error;
};

/// A moment or distortion integral is infinite.
class DivergentIntegral : public Error {
public:
    using Error::Error;
};

/// An iterative solver stopped without meeting its tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace ifr
