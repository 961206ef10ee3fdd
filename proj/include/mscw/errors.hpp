#pragma once

#include <stdexcept>
#include <string>

namespace mscw {

// Exit-code contract used by the CLI: validation -> 2, non-convergence -> 3,
// budget -> 4. Everything else is a plain error.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct NonConvergenceError : Error {
    double last_residual;
    explicit NonConvergenceError(const std::string& what, double residual)
        : Error(what), last_residual(residual) {}
};

struct BudgetExceededError : Error {
    using Error::Error;
};

// A formula was asked for at a point where it is singular (e.g. the Gaussian
// susceptibility at a degenerate minimum).
struct DegeneracyError : Error {
    using Error::Error;
};

struct QuadratureError : Error {
    using Error::Error;
};

} // namespace mscw
