#ifndef PWDAMP_ERRORS_HPP
#define PWDAMP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pwdamp {

/// Base class for every computation error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sin²(μ) + sin²(μξ)sin²(μ(1−ξ)) fell below the resonance floor.
class ResonantDenominator : public Error {
public:
    ResonantDenominator(double mu, double denominator)
        : Error("resonant denominator " + std::to_string(denominator) + " at mu=" + std::to_string(mu)),
          mu_(mu), denominator_(denominator) {}

    double mu() const noexcept { return mu_; }
    double denominator() const noexcept { return denominator_; }

private:
    double mu_;
    double denominator_;
};

/// Argument-principle contour passes (numerically) through a zero.
class ContourThroughRoot : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class MeshMismatch : public Error {
public:
    using Error::Error;
};

class LinearSolveError : public Error {
public:
    using Error::Error;
};

} // namespace pwdamp

#endif
