#ifndef PWDAMP_DIOPHANTINE_HPP
#define PWDAMP_DIOPHANTINE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pwdamp::diophantine {

struct Convergent {
    std::int64_t p = 0;
    std::int64_t q = 1;
};

/// Simple continued fraction [0; a_1, a_2, ...] of a value in (0,1).
struct ContinuedFraction {
    double value = 0.0;
    /// Leading entry is a_0 = 0.
    std::vector<std::int64_t> partial_quotients;
    /// convergents[k] = p_k / q_k built from partial_quotients[0..k].
    std::vector<Convergent> convergents;
    /// The residual vanished (to tolerance) or a quotient overflowed: the value
    /// is treated as rational.
    bool terminated = false;
    /// Expansion stopped because the floating-point residual no longer
    /// determines the next quotient.
    bool precision_exhausted = false;

    /// Largest a_k for k >= 1, or 0 when there are none.
    std::int64_t max_partial_quotient() const;
    /// Number of quotients after a_0.
    std::size_t depth() const { return partial_quotients.empty() ? 0 : partial_quotients.size() - 1; }
};

inline constexpr double default_rational_tol = 1e-12;
inline constexpr double partial_quotient_overflow = 1e12;

/// Expands x in (0,1). Stops after `depth` quotients, when the residual drops
/// below `rational_tol` (or below its own rounding-error bound), or when a
/// quotient exceeds 1e12.
ContinuedFraction expand_continued_fraction(double x, int depth, double rational_tol = default_rational_tol);

/// |||ρ|||, distance to the nearest integer.
double dist_nearest_integer(double rho);

/// |||m·ξ||| with the product formed exactly (fused multiply-add), so large m
/// keep full precision.
double dist_nearest_integer(std::int64_t m, double xi);

/// Positive nondecreasing function used in the Liouville-type bound φ(m)|||mξ||| ≥ κ.
class GrowthFunction {
public:
    enum class Kind { identity, power_log, exponential, table };

    static GrowthFunction identity();
    /// x^α (ln x)^(1+ε); defined for x > 1. Requires α ≥ 1, ε > 0.
    static GrowthFunction power_log(double alpha, double epsilon);
    /// e^(βx), β > 0.
    static GrowthFunction exponential(double beta);
    /// Piecewise-linear through (x, y) points, constant beyond the ends.
    /// Points must have increasing x and positive nondecreasing y.
    static GrowthFunction table(std::vector<std::pair<double, double>> points);

    double operator()(double x) const;
    Kind kind() const { return kind_; }
    /// Evaluation is guaranteed positive for x strictly above this value.
    double domain_min() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::identity;
    double a_ = 1.0;
    double b_ = 0.0;
    std::vector<std::pair<double, double>> points_;
};

enum class ConditionId { m_grid, poly, liouville, cos_variant };

std::string to_string(ConditionId id);

/// Constants fitted (or supplied) while testing a condition. Only the ones
/// meaningful for the condition are set.
struct FittedConstants {
    std::optional<double> K1;
    std::optional<double> K2;
    std::optional<double> K;
    std::optional<double> epsilon;
    std::optional<double> kappa;
};

/// Outcome of testing one stabilization condition on a finite grid. Verdicts
/// are evidence on the sampled grid ("grid-verified"), never proofs.
struct ConditionReport {
    ConditionId condition = ConditionId::m_grid;
    double xi = 0.0;
    /// μ values for the frequency conditions; empty for the Liouville test,
    /// which scans the integer range [m_min, m_max] instead.
    std::vector<double> grid;
    std::int64_t m_min = 0;
    std::int64_t m_max = 0;
    bool pass = false;
    /// Grid point (or integer m) where the violation occurs. Set whenever pass is false.
    std::optional<double> witness;
    /// The weighted value at the witness is at or below this threshold on failure.
    double violation_threshold = 0.0;
    FittedConstants constants;
    /// Infimum of the weighted expression over the head (first three quarters)
    /// and tail (last quarter) of the grid.
    double head_infimum = 0.0;
    double tail_infimum = 0.0;
    std::string evidence = "grid-verified";
};

/// sin²(μ) + sin²(ξμ)·sin²((1−ξ)μ), always in [0,2].
double evaluate_M_expression(double xi, double mu);

/// cos²(μ) + cos²(ξμ)·sin²((1−ξ)μ), the Dirichlet–Neumann analogue.
double evaluate_cos_expression(double xi, double mu);

struct GridCheckSettings {
    /// Raw expression values at or below this are treated as exact zeros
    /// (double-precision noise at exact resonances is ~1e-30).
    double zero_floor = 1e-20;
    /// Tail infimum may fall at most this factor below the head infimum.
    double tail_factor = 10.0;
};

ConditionReport check_condition_M_grid(double xi, std::span<const double> mu_grid, double K1,
                                       const GridCheckSettings& settings = {});

/// Weight μ^(1+ε) in place of e^(K₁μ).
ConditionReport check_condition_poly(double xi, double epsilon, std::span<const double> mu_grid,
                                     const GridCheckSettings& settings = {});

ConditionReport check_condition_cos_variant(double xi, std::span<const double> mu_grid, double K1,
                                            const GridCheckSettings& settings = {});

/// Scans m = 2..m_max for φ(m)|||mξ||| ≥ κ. The witness on failure is the
/// smallest violating m; constants.kappa holds the observed infimum.
ConditionReport check_liouville_type(double xi, const GrowthFunction& phi, double kappa, std::int64_t m_max);

/// Raw expression of the report's condition at μ (or m for Liouville).
double condition_expression(const ConditionReport& report, double point);
/// Weighted expression (the quantity whose infimum is K₂, K or κ).
double weighted_expression(const ConditionReport& report, double point, const GridCheckSettings& settings = {});

/// Uniform grid lo, lo+step, ..., ≤ hi, optionally merged with every multiple
/// of π/2 inside [lo, hi] so exact resonances of rational positions are sampled.
std::vector<double> default_mu_grid(double lo = 1.0, double hi = 500.0, double step = 0.01,
                                    bool include_resonances = true);

struct ClassifySettings {
    int cf_depth = 40;
    double rational_tol = default_rational_tol;
    std::int64_t constant_type_bound = 20;
    /// Empty means default_mu_grid().
    std::vector<double> mu_grid;
    double K1 = 1.0;
    double poly_epsilon = 1.0;
    GridCheckSettings grid;
};

struct Classification {
    double xi = 0.0;
    bool is_rational = false;
    bool strongly_stable = false;
    bool constant_type = false;
    ContinuedFraction continued_fraction;
    ConditionReport m_grid;
    ConditionReport poly;
    ConditionReport cos_variant;
};

Classification classify_actuator(double xi, const ClassifySettings& settings = {});

/// Parses a decimal literal, a fraction "p/q", or a named constant
/// ("golden", "silver", "liouville"). Throws std::invalid_argument unless the
/// result lies in (0,1).
double parse_xi(std::string_view text);

/// Σ_{k=1..terms} 10^(−k!) rounded to double.
double liouville_constant(int terms = 6);

inline const double golden_xi = 0.6180339887498948482;

} // namespace pwdamp::diophantine

#endif
