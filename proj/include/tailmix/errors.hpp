#pragma once

#include <stdexcept>
#include <string>

namespace tailmix {

// Numeric inversion failed to reach its tolerance; carries the residual.
class InversionError : public std::runtime_error {
public:
    InversionError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// The rejection sampler hit its attempt cap.
class RunawayRejectionError : public std::runtime_error {
public:
    RunawayRejectionError(double lambda, long attempts)
        : std::runtime_error("rejection sampler exceeded " + std::to_string(attempts) +
                             " attempts at lambda=" + std::to_string(lambda)),
          lambda_(lambda), attempts_(attempts) {}
    double lambda() const { return lambda_; }
    long attempts() const { return attempts_; }

private:
    double lambda_;
    long attempts_;
};

// Calibration produced an invalid mixing distribution (e.g. a negative mass).
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tailmix
