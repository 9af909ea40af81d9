#ifndef PWDAMP_DECAY_FIT_HPP
#define PWDAMP_DECAY_FIT_HPP

// Least-squares fits of energy traces in log space:
//   logarithmic  E ≈ C / (ln(2+t))^{2n}
//   polynomial   E ≈ C / (1+t)^{1/(1+ε)}
//   exponential  E ≈ M e^{−rate·t}
// A good fit is evidence about a finite horizon, not a decay-rate proof.

#include <span>
#include <string>
#include <vector>

namespace pwdamp::decay_fit {

struct DecayModel {
    enum class Kind { logarithmic, polynomial, exponential };
    Kind kind = Kind::logarithmic;
    /// C, or M for the exponential law.
    double C = 1.0;
    int n = 1;
    double epsilon = 0.0;
    double rate = 0.0;

    double operator()(double t) const;
    /// Stable label, e.g. "log(n=1)", "poly(eps=0)", "exp".
    std::string label() const;
};

struct FitResult {
    DecayModel model;
    /// RMS of ln(E/model) over the fitted samples, uniform in sample index.
    double residual = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    std::size_t samples = 0;
};

/// Samples with E > floor_ratio·E(0) take part in a fit.
inline constexpr double default_floor_ratio = 1e-14;
inline constexpr std::size_t min_fit_samples = 10;

/// Fixed n ≥ 1. Throws InsufficientData with fewer than 10 usable samples,
/// std::invalid_argument on mismatched or non-increasing times.
FitResult fit_log(std::span<const double> t, std::span<const double> E, int n);
/// Fixed ε ≥ 0.
FitResult fit_poly(std::span<const double> t, std::span<const double> E, double epsilon);
/// Fits both M and rate.
FitResult fit_exp(std::span<const double> t, std::span<const double> E);

/// log n = 1,2,3, poly ε = 0,1,2, exp, stably sorted by residual (ties keep
/// this order).
std::vector<FitResult> model_select(std::span<const double> t, std::span<const double> E);

} // namespace pwdamp::decay_fit

#endif
