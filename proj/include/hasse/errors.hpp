#pragma once

#include <stdexcept>
#include <string>

namespace hasse {

// A computation would exceed its configured memory or work budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value that must be real (or integral) came out otherwise.
class NumericalIntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative or adaptive routine failed to reach its tolerance. The best
// estimate reached is kept for callers that can use it; complex results put
// their imaginary part in best_imag.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string &what, double best_estimate, double error_estimate, double best_imag = 0.0)
        : std::runtime_error(what), best_(best_estimate), imag_(best_imag), error_(error_estimate) {}

    double best_estimate() const noexcept { return best_; }
    double best_imag() const noexcept { return imag_; }
    double error_estimate() const noexcept { return error_; }

private:
    double best_;
    double imag_;
    double error_;
};

} // namespace hasse
