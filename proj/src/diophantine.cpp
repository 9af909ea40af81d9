#include "pwdamp/diophantine.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pwdamp::diophantine {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

// Beyond this residual error bound the next quotient is not determined.
constexpr double precision_limit = 1e-3;

bool checked_next(std::int64_t a, std::int64_t prev, std::int64_t prev2, std::int64_t& out)
{
    std::int64_t prod = 0;
    if (__builtin_mul_overflow(a, prev, &prod)) return false;
    return !__builtin_add_overflow(prod, prev2, &out);
}

enum class Weight { exponential, power };

ConditionReport scan_frequency_condition(ConditionId id, double xi, std::span<const double> grid, Weight weight,
                                         double parameter, const GridCheckSettings& settings)
{
    if (grid.empty()) throw std::invalid_argument("condition check: empty mu grid");
    if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("condition check: mu grid must be ascending");

    ConditionReport r;
    r.condition = id;
    r.xi = xi;
    r.grid.assign(grid.begin(), grid.end());
    if (weight == Weight::exponential) r.constants.K1 = parameter;
    else r.constants.epsilon = parameter;

    const std::size_t n = grid.size();
    const std::size_t tail_len = (n + 3) / 4;
    const std::size_t tail_start = n - tail_len;

    std::vector<double> weighted(n);
    for (std::size_t i = 0; i < n; ++i) weighted[i] = weighted_expression(r, grid[i], settings);

    auto argmin = [&](std::size_t lo, std::size_t hi) {
        std::size_t best = lo;
        for (std::size_t i = lo + 1; i < hi; ++i)
            if (weighted[i] < weighted[best]) best = i;
        return best;
    };

    const std::size_t global = argmin(0, n);
    const std::size_t tail_arg = argmin(tail_start, n);
    const double infimum = weighted[global];
    r.tail_infimum = weighted[tail_arg];
    r.head_infimum = tail_start > 0 ? weighted[argmin(0, tail_start)] : std::numeric_limits<double>::infinity();

    if (weight == Weight::exponential) r.constants.K2 = infimum;
    else r.constants.K = infimum;

    if (!(infimum > 0.0)) {
        r.pass = false;
        r.witness = grid[global];
        r.violation_threshold = 0.0;
    } else if (tail_start > 0 && r.tail_infimum < r.head_infimum / settings.tail_factor) {
        r.pass = false;
        r.witness = grid[tail_arg];
        r.violation_threshold = r.head_infimum / settings.tail_factor;
    } else {
        r.pass = true;
        r.witness = grid[global];
        r.violation_threshold = 0.0;
    }
    return r;
}

} // namespace

std::int64_t ContinuedFraction::max_partial_quotient() const
{
    std::int64_t best = 0;
    for (std::size_t k = 1; k < partial_quotients.size(); ++k) best = std::max(best, partial_quotients[k]);
    return best;
}

ContinuedFraction expand_continued_fraction(double x, int depth, double rational_tol)
{
    if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("expand_continued_fraction: x must lie in (0,1)");
    if (depth < 1) throw std::invalid_argument("expand_continued_fraction: depth must be positive");

    ContinuedFraction cf;
    cf.value = x;
    cf.partial_quotients.push_back(0);
    cf.convergents.push_back({0, 1});

    std::int64_t p_prev = 1, q_prev = 0; // p_{-1}, q_{-1}
    double r = x;     // current fractional residual in (0,1)
    double err = 0.0; // bound on its accumulated rounding error

    for (int k = 1; k <= depth; ++k) {
        const double y = 1.0 / r;
        if (y > partial_quotient_overflow + 1.0) {
            cf.terminated = true;
            break;
        }
        const double err_y = err / (r * r) + eps * y;
        if (err_y > precision_limit) {
            cf.precision_exhausted = true;
            break;
        }
        double a = std::floor(y);
        double frac = y - a;
        const double zero_tol = std::max(rational_tol, 8.0 * err_y);
        if (1.0 - frac <= zero_tol) {
            a += 1.0;
            frac = 0.0;
        }
        if (a > partial_quotient_overflow) {
            cf.terminated = true;
            break;
        }
        const auto ai = static_cast<std::int64_t>(a);
        const Convergent& last = cf.convergents.back();
        Convergent next;
        if (!checked_next(ai, last.p, p_prev, next.p) || !checked_next(ai, last.q, q_prev, next.q)) {
            cf.precision_exhausted = true;
            break;
        }
        p_prev = last.p;
        q_prev = last.q;
        cf.partial_quotients.push_back(ai);
        cf.convergents.push_back(next);

        if (frac <= zero_tol) {
            cf.terminated = true;
            break;
        }
        r = frac;
        err = err_y;
    }
    return cf;
}

double dist_nearest_integer(double rho)
{
    const double d = std::abs(rho - std::nearbyint(rho));
    return std::min(d, 0.5);
}

double dist_nearest_integer(std::int64_t m, double xi)
{
    const double md = static_cast<double>(m);
    const double nearest = std::nearbyint(md * xi);
    // m*xi - nearest with a single rounding.
    const double d = std::abs(std::fma(md, xi, -nearest));
    return std::min(d, 0.5);
}

// ---------------------------------------------------------------------------
// GrowthFunction

GrowthFunction GrowthFunction::identity()
{
    return {};
}

GrowthFunction GrowthFunction::power_log(double alpha, double epsilon)
{
    if (!(alpha >= 1.0) || !(epsilon > 0.0)) throw std::invalid_argument("power_log growth: need alpha >= 1, epsilon > 0");
    GrowthFunction g;
    g.kind_ = Kind::power_log;
    g.a_ = alpha;
    g.b_ = epsilon;
    return g;
}

GrowthFunction GrowthFunction::exponential(double beta)
{
    if (!(beta > 0.0)) throw std::invalid_argument("exponential growth: need beta > 0");
    GrowthFunction g;
    g.kind_ = Kind::exponential;
    g.a_ = beta;
    return g;
}

GrowthFunction GrowthFunction::table(std::vector<std::pair<double, double>> points)
{
    if (points.empty()) throw std::invalid_argument("table growth: no points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].second > 0.0)) throw std::invalid_argument("table growth: values must be positive");
        if (i > 0 && !(points[i].first > points[i - 1].first))
            throw std::invalid_argument("table growth: abscissae must increase");
        if (i > 0 && points[i].second < points[i - 1].second)
            throw std::invalid_argument("table growth: values must be nondecreasing");
    }
    GrowthFunction g;
    g.kind_ = Kind::table;
    g.points_ = std::move(points);
    return g;
}

double GrowthFunction::operator()(double x) const
{
    switch (kind_) {
    case Kind::identity:
        return x;
    case Kind::power_log:
        return std::pow(x, a_) * std::pow(std::log(x), 1.0 + b_);
    case Kind::exponential:
        return std::exp(a_ * x);
    case Kind::table: {
        if (x <= points_.front().first) return points_.front().second;
        if (x >= points_.back().first) return points_.back().second;
        auto it = std::upper_bound(points_.begin(), points_.end(), x,
                                   [](double v, const std::pair<double, double>& p) { return v < p.first; });
        const auto& [x1, y1] = *it;
        const auto& [x0, y0] = *(it - 1);
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
    }
    return x;
}

double GrowthFunction::domain_min() const
{
    switch (kind_) {
    case Kind::power_log:
        return 1.0;
    case Kind::table:
        return -std::numeric_limits<double>::infinity();
    default:
        return 0.0;
    }
}

std::string GrowthFunction::describe() const
{
    std::ostringstream os;
    switch (kind_) {
    case Kind::identity:
        os << "identity";
        break;
    case Kind::power_log:
        os << "power_log(alpha=" << a_ << ",epsilon=" << b_ << ")";
        break;
    case Kind::exponential:
        os << "exponential(beta=" << a_ << ")";
        break;
    case Kind::table:
        os << "table(" << points_.size() << " points)";
        break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Conditions

std::string to_string(ConditionId id)
{
    switch (id) {
    case ConditionId::m_grid:
        return "M-grid";
    case ConditionId::poly:
        return "poly";
    case ConditionId::liouville:
        return "liouville";
    case ConditionId::cos_variant:
        return "cos-variant";
    }
    return "unknown";
}

double evaluate_M_expression(double xi, double mu)
{
    const double s = std::sin(mu);
    const double a = std::sin(xi * mu) * std::sin((1.0 - xi) * mu);
    return s * s + a * a;
}

double evaluate_cos_expression(double xi, double mu)
{
    const double c = std::cos(mu);
    const double a = std::cos(xi * mu) * std::sin((1.0 - xi) * mu);
    return c * c + a * a;
}

double condition_expression(const ConditionReport& report, double point)
{
    switch (report.condition) {
    case ConditionId::m_grid:
    case ConditionId::poly:
        return evaluate_M_expression(report.xi, point);
    case ConditionId::cos_variant:
        return evaluate_cos_expression(report.xi, point);
    case ConditionId::liouville:
        return dist_nearest_integer(static_cast<std::int64_t>(point), report.xi);
    }
    return 0.0;
}

double weighted_expression(const ConditionReport& report, double point, const GridCheckSettings& settings)
{
    const double e = condition_expression(report, point);
    switch (report.condition) {
    case ConditionId::m_grid:
    case ConditionId::cos_variant:
        if (e <= settings.zero_floor) return 0.0;
        return e * std::exp(report.constants.K1.value_or(0.0) * point);
    case ConditionId::poly:
        if (e <= settings.zero_floor) return 0.0;
        return e * std::pow(point, 1.0 + report.constants.epsilon.value_or(0.0));
    case ConditionId::liouville:
        // Weighting by φ needs the GrowthFunction, which the report does not carry.
        return e;
    }
    return e;
}

ConditionReport check_condition_M_grid(double xi, std::span<const double> mu_grid, double K1,
                                       const GridCheckSettings& settings)
{
    return scan_frequency_condition(ConditionId::m_grid, xi, mu_grid, Weight::exponential, K1, settings);
}

ConditionReport check_condition_poly(double xi, double epsilon, std::span<const double> mu_grid,
                                     const GridCheckSettings& settings)
{
    if (!(epsilon >= 0.0)) throw std::invalid_argument("check_condition_poly: epsilon must be nonnegative");
    return scan_frequency_condition(ConditionId::poly, xi, mu_grid, Weight::power, epsilon, settings);
}

ConditionReport check_condition_cos_variant(double xi, std::span<const double> mu_grid, double K1,
                                            const GridCheckSettings& settings)
{
    return scan_frequency_condition(ConditionId::cos_variant, xi, mu_grid, Weight::exponential, K1, settings);
}

ConditionReport check_liouville_type(double xi, const GrowthFunction& phi, double kappa, std::int64_t m_max)
{
    if (m_max < 2) throw std::invalid_argument("check_liouville_type: m_max must be >= 2");
    ConditionReport r;
    r.condition = ConditionId::liouville;
    r.xi = xi;
    r.m_min = 2;
    r.m_max = m_max;
    r.violation_threshold = kappa;
    r.pass = true;

    double infimum = std::numeric_limits<double>::infinity();
    for (std::int64_t m = 2; m <= m_max; ++m) {
        const double d = dist_nearest_integer(m, xi);
        const double v = d == 0.0 ? 0.0 : phi(static_cast<double>(m)) * d;
        infimum = std::min(infimum, v);
        if (r.pass && v < kappa) {
            r.pass = false;
            r.witness = static_cast<double>(m);
        }
    }
    r.constants.kappa = infimum;
    r.head_infimum = r.tail_infimum = infimum;
    return r;
}

std::vector<double> default_mu_grid(double lo, double hi, double step, bool include_resonances)
{
    if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0)) throw std::invalid_argument("default_mu_grid: bad range");
    std::vector<double> grid;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    grid.reserve(n + 1 + (include_resonances ? static_cast<std::size_t>(2.0 * hi / std::numbers::pi) + 1 : 0));
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
    if (include_resonances) {
        const double half_pi = 0.5 * std::numbers::pi;
        for (long k = static_cast<long>(std::ceil(lo / half_pi)); k * half_pi <= hi; ++k) grid.push_back(k * half_pi);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
    return grid;
}

Classification classify_actuator(double xi, const ClassifySettings& settings)
{
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("classify_actuator: xi must lie in (0,1)");
    Classification c;
    c.xi = xi;
    c.continued_fraction = expand_continued_fraction(xi, settings.cf_depth, settings.rational_tol);
    c.is_rational = c.continued_fraction.terminated;
    c.strongly_stable = !c.is_rational;
    c.constant_type = !c.is_rational && c.continued_fraction.max_partial_quotient() <= settings.constant_type_bound;

    const std::vector<double> grid = settings.mu_grid.empty() ? default_mu_grid() : settings.mu_grid;
    c.m_grid = check_condition_M_grid(xi, grid, settings.K1, settings.grid);
    c.poly = check_condition_poly(xi, settings.poly_epsilon, grid, settings.grid);
    c.cos_variant = check_condition_cos_variant(xi, grid, settings.K1, settings.grid);
    return c;
}

double liouville_constant(int terms)
{
    double s = 0.0;
    long fact = 1;
    for (int k = 1; k <= terms; ++k) {
        fact *= k;
        if (fact > 330) break; // 10^(-k!) underflows
        s += std::pow(10.0, -static_cast<double>(fact));
    }
    return s;
}

double parse_xi(std::string_view text)
{
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    auto parse_number = [](std::string_view s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw std::invalid_argument("cannot parse number '" + std::string(s) + "'");
        return v;
    };

    text = trim(text);
    double xi = 0.0;
    if (text == "golden") xi = golden_xi;
    else if (text == "silver") xi = std::numbers::sqrt2 - 1.0;
    else if (text == "liouville") xi = liouville_constant(6);
    else if (auto slash = text.find('/'); slash != std::string_view::npos) {
        const double p = parse_number(trim(text.substr(0, slash)));
        const double q = parse_number(trim(text.substr(slash + 1)));
        if (q == 0.0) throw std::invalid_argument("xi fraction has zero denominator");
        xi = p / q;
    } else {
        xi = parse_number(text);
    }
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("xi must lie in (0,1), got '" + std::string(text) + "'");
    return xi;
}

} // namespace pwdamp::diophantine
