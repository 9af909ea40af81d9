#include "pwdamp/decay_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pwdamp/errors.hpp"

namespace pwdamp::decay_fit {

namespace {

struct Window {
    std::vector<double> t;
    std::vector<double> logE;
};

Window usable_samples(std::span<const double> t, std::span<const double> E)
{
    if (t.size() != E.size()) throw std::invalid_argument("decay fit: time and energy columns differ in length");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw std::invalid_argument("decay fit: times must increase");
    Window w;
    if (!t.empty() && t.front() >= 0.0 && E.front() > 0.0) {
        const double floor = default_floor_ratio * E.front();
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (E[i] > floor && std::isfinite(E[i])) {
                w.t.push_back(t[i]);
                w.logE.push_back(std::log(E[i]));
            }
        }
    }
    if (w.t.size() < min_fit_samples)
        throw InsufficientData("decay fit: " + std::to_string(w.t.size()) + " usable samples, need " +
                               std::to_string(min_fit_samples));
    return w;
}

// log E = log C + shape(t) with the shape fixed: log C is the mean offset.
FitResult fit_offset(const Window& w, DecayModel model, double (*shape)(double, const DecayModel&))
{
    const std::size_t m = w.t.size();
    double offset = 0.0;
    for (std::size_t i = 0; i < m; ++i) offset += w.logE[i] - shape(w.t[i], model);
    offset /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = w.logE[i] - offset - shape(w.t[i], model);
        ss += r * r;
    }
    model.C = std::exp(offset);
    return {model, std::sqrt(ss / static_cast<double>(m)), w.t.front(), w.t.back(), m};
}

double log_shape(double t, const DecayModel& m) { return -2.0 * m.n * std::log(std::log(2.0 + t)); }
double poly_shape(double t, const DecayModel& m) { return -std::log1p(t) / (1.0 + m.epsilon); }

} // namespace

double DecayModel::operator()(double t) const
{
    switch (kind) {
    case Kind::logarithmic: return C / std::pow(std::log(2.0 + t), 2.0 * n);
    case Kind::polynomial: return C / std::pow(1.0 + t, 1.0 / (1.0 + epsilon));
    case Kind::exponential: return C * std::exp(-rate * t);
    }
    return 0.0;
}

std::string DecayModel::label() const
{
    switch (kind) {
    case Kind::logarithmic: return "log(n=" + std::to_string(n) + ")";
    case Kind::polynomial: {
        std::string e = std::to_string(epsilon);
        e.erase(e.find_last_not_of('0') + 1);
        if (!e.empty() && e.back() == '.') e.pop_back();
        return "poly(eps=" + e + ")";
    }
    case Kind::exponential: return "exp";
    }
    return "?";
}

FitResult fit_log(std::span<const double> t, std::span<const double> E, int n)
{
    if (n < 1) throw std::invalid_argument("fit_log: n must be a positive integer");
    DecayModel m;
    m.kind = DecayModel::Kind::logarithmic;
    m.n = n;
    return fit_offset(usable_samples(t, E), m, log_shape);
}

FitResult fit_poly(std::span<const double> t, std::span<const double> E, double epsilon)
{
    if (!(epsilon >= 0.0)) throw std::invalid_argument("fit_poly: epsilon must be nonnegative");
    DecayModel m;
    m.kind = DecayModel::Kind::polynomial;
    m.epsilon = epsilon;
    return fit_offset(usable_samples(t, E), m, poly_shape);
}

FitResult fit_exp(std::span<const double> t, std::span<const double> E)
{
    const Window w = usable_samples(t, E);
    const std::size_t m = w.t.size();
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        tm += w.t[i];
        ym += w.logE[i];
    }
    tm /= static_cast<double>(m);
    ym /= static_cast<double>(m);
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        stt += (w.t[i] - tm) * (w.t[i] - tm);
        sty += (w.t[i] - tm) * (w.logE[i] - ym);
    }
    const double slope = sty / stt;
    const double intercept = ym - slope * tm;
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = w.logE[i] - intercept - slope * w.t[i];
        ss += r * r;
    }
    DecayModel model;
    model.kind = DecayModel::Kind::exponential;
    model.C = std::exp(intercept);
    model.rate = -slope;
    return {model, std::sqrt(ss / static_cast<double>(m)), w.t.front(), w.t.back(), m};
}

std::vector<FitResult> model_select(std::span<const double> t, std::span<const double> E)
{
    std::vector<FitResult> fits;
    for (int n = 1; n <= 3; ++n) fits.push_back(fit_log(t, E, n));
    for (double eps : {0.0, 1.0, 2.0}) fits.push_back(fit_poly(t, E, eps));
    fits.push_back(fit_exp(t, E));
    std::stable_sort(fits.begin(), fits.end(),
                     [](const FitResult& a, const FitResult& b) { return a.residual < b.residual; });
    return fits;
}

} // namespace pwdamp::decay_fit
