// errors.hpp: exception types shared by every mqed module

#pragma once

#include <stdexcept>
#include <string>

namespace mqed {

// Precondition or domain violation (bad geometry, lossy coincidence, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Quadrature or extrapolation did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_estimate_norm, double error_bound)
        : std::runtime_error(what + " (best |estimate| = " + std::to_string(best_estimate_norm) +
                             ", error bound = " + std::to_string(error_bound) + ")"),
          best_estimate_norm_(best_estimate_norm), error_bound_(error_bound) {}

    double best_estimate_norm() const noexcept { return best_estimate_norm_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double best_estimate_norm_;
    double error_bound_;
};

// Time stepping left its stable/physical region.
class InstabilityError : public std::runtime_error {
public:
    InstabilityError(const std::string& what, double time)
        : std::runtime_error(what + " at t = " + std::to_string(time)), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace mqed
