#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ecudn {

/// Argument outside the domain of a formula (EB pole, non-positive exponent, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical integration did not reach its tolerance, or produced a value the
/// caller cannot use (e.g. a non-positive argument for the outer logarithm).
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double value, double error_estimate)
        : std::runtime_error(what), value_(value), error_estimate_(error_estimate) {}

    double value() const noexcept { return value_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double value_;
    double error_estimate_;
};

/// Layout generation could not satisfy its contract (an SBS with no candidate UE).
class LayoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Queue stability fails for the listed SBSs: EC at vanishing QoS exponent does
/// not exceed the mean arrival rate, or a bisection bracket has no sign change.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, std::vector<std::size_t> sbs)
        : std::runtime_error(what), sbs_(std::move(sbs)) {}

    const std::vector<std::size_t>& sbs() const noexcept { return sbs_; }

private:
    std::vector<std::size_t> sbs_;
};

}  // namespace ecudn
