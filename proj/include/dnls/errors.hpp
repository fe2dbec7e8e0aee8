#ifndef DNLS_ERRORS_HPP
#define DNLS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dnls {

// Argument outside the domain of an operation (bad cutoff, bad size, NaN input).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A model precondition does not hold (e.g. effective damping <= 0).
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Step size fell below dt_min.
class StiffnessError : public std::runtime_error {
public:
    StiffnessError(double t, double norm)
        : std::runtime_error("step size underflow at t=" + std::to_string(t) +
                             " (|psi|=" + std::to_string(norm) + ")"),
          time_(t), norm_(norm) {}

    double time() const noexcept { return time_; }
    double norm() const noexcept { return norm_; }

private:
    double time_;
    double norm_;
};

// Fixed-point or fit procedure failed to produce a usable result.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid scenario configuration (schema or range violation).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dnls

#endif
