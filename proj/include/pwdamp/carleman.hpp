#ifndef PWDAMP_CARLEMAN_HPP
#define PWDAMP_CARLEMAN_HPP

// Semiclassical Carleman machinery on a single interval [a,b]:
// P = d²/dx² + 1/h², its conjugate P_φ = −h² e^{φ/h} P e^{−φ/h}, the split
// P_φ = Q₂ + iQ₁ and the weighted estimate with e^{2φ/h}.

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pwdamp::carleman {

using cplx = std::complex<double>;
using Grid = std::vector<cplx>;

/// Uniform grid a = x_0 < ... < x_n = b.
struct UniformGrid {
    double a = 0.0;
    double b = 1.0;
    int n = 1;

    double dx() const { return (b - a) / n; }
    double x(int j) const { return j == n ? b : a + j * dx(); }
    std::size_t size() const { return static_cast<std::size_t>(n) + 1; }
    std::vector<double> nodes() const;
};

class WeightFunction {
public:
    enum class Kind { shifted_quadratic, exponential, polynomial };

    /// scale·(x − c)².
    static WeightFunction shifted_quadratic(double a, double b, double c, double scale = 1.0);
    /// A·e^{β(x − s)}.
    static WeightFunction exponential(double a, double b, double A, double beta, double shift = 0.0);
    /// Σ c_k x^k, coefficients in increasing degree.
    static WeightFunction polynomial(double a, double b, std::vector<double> coefficients);

    /// φ, φ', φ'', φ''', φ'''' at x.
    std::array<double, 5> derivatives(double x) const;
    double operator()(double x) const { return derivatives(x)[0]; }
    double derivative(double x, int order) const { return derivatives(x)[static_cast<std::size_t>(order)]; }

    double a() const { return a_; }
    double b() const { return b_; }
    Kind kind() const { return kind_; }
    std::string describe() const;

    /// Largest |central difference of φ^(k) − φ^(k+1)| (k = 0..3) over 101
    /// points of [a,b]; O(step²) when the evaluators are consistent.
    double consistency_error(double step) const;

private:
    Kind kind_ = Kind::shifted_quadratic;
    double a_ = 0.0;
    double b_ = 1.0;
    std::vector<double> p_;
};

/// Sign condition at the Dirichlet end: left needs φ'(a) > 0 with u(a) = 0,
/// right needs φ'(b) < 0 with u(b) = 0.
enum class Side { left, right };

std::string to_string(Side side);

struct WeightViolation {
    std::string condition;
    double x = 0.0;
    double value = 0.0;
};

/// Empty when |φ'| > 0 and φ'' > 0 on a dense sample and the endpoint sign
/// condition holds. One entry per failing condition, at its worst sample.
std::vector<WeightViolation> validate_weight(const WeightFunction& phi, Side side, int samples = 2001);

/// Pu = u'' + u/h² by centered second differences, one-sided at the ends.
Grid apply_operator_P(std::span<const cplx> u, double dx, double h);

/// P_φw = −h²w'' + 2hφ'w' + hφ''w − (φ'² + 1)w, i.e. (δ + iφ')²w − w with
/// δ = (h/i)d/dx, derivatives of w by centered differences.
Grid apply_conjugated_operator(const WeightFunction& phi, const UniformGrid& grid, double h, std::span<const cplx> w);

/// −h² e^{sφ/h} P(e^{−sφ/h} w) evaluated directly on the grid (s = +1 gives
/// P_φ, s = −1 gives P_φ*). Neighbouring exponentials are taken relative to
/// the centre node, so only e^{(φ_j − φ_k)/h} for adjacent nodes is formed.
/// Throws pwdamp::Error when even that ratio overflows.
Grid conjugation_route(const WeightFunction& phi, const UniformGrid& grid, double h, std::span<const cplx> w,
                       int sign = 1);

struct QParts {
    Grid q2;
    Grid q1;
};

/// Q₂w = δ²w − (φ'² + 1)w, Q₁w = 2φ'δw − ihφ''w.
QParts decompose_Q(const WeightFunction& phi, const UniformGrid& grid, double h, std::span<const cplx> w);

/// Max-norm discrepancies between closed forms and the conjugation route.
struct ConjugationCheck {
    double dual_route = 0.0;     ///< ‖P_φw(expanded) − conjugation_route(w)‖
    double reconstruction = 0.0; ///< ‖(Q₂ + iQ₁)w − conjugation_route(w)‖
    double q2 = 0.0;             ///< ‖Q₂w − (P_φ + P_φ*)w/2‖, right side by conjugation
    double q1 = 0.0;             ///< ‖Q₁w − (P_φ − P_φ*)w/(2i)‖, right side by conjugation
};

ConjugationCheck check_conjugation(const WeightFunction& phi, const UniformGrid& grid, double h,
                                   std::span<const cplx> w);

/// Residuals of the two boundary-term identities obtained by integrating
/// ∫v·conj(Q₂w) and ∫v·conj(Q₁w) by parts.
struct IntegrationByPartsCheck {
    double q2_residual = 0.0;
    double q1_residual = 0.0;
    double scale = 0.0;
};

IntegrationByPartsCheck check_integration_by_parts(const WeightFunction& phi, const UniformGrid& grid, double h,
                                                   std::span<const cplx> v, std::span<const cplx> w);

/// The published expansion of ∫|P_φw|² uses 4h∫φ''φ'|w|² in the interior and
/// ∓2h²Im(w δw̄) at the ends. The corrected form has 4h∫φ''(φ')²|w|² and
/// ∓2h²φ''·Im(w δw̄).
enum class IdentityReading { as_printed, corrected };

struct EnergyIdentityReport {
    IdentityReading reading = IdentityReading::corrected;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    /// Largest magnitude among the individual terms.
    double scale = 0.0;
};

EnergyIdentityReport check_energy_identity(const WeightFunction& phi, const UniformGrid& grid, double h,
                                           std::span<const cplx> w, IdentityReading reading);

struct CarlemanRecord {
    double h = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    /// lhs/rhs; 0 when both vanish, +∞ when only rhs does.
    double ratio = 0.0;
};

/// Both sides are reported with the common factor e^{2 max φ/h} removed.
struct CarlemanReport {
    Side side = Side::left;
    std::vector<double> h_grid;
    std::vector<CarlemanRecord> records;
    double ratio_sup = 0.0;
    double C_hat = 0.0;
    double h0_hat = 0.0;
};

/// u must vanish at a (left) or b (right); throws std::invalid_argument
/// otherwise or when u does not match the grid.
CarlemanReport evaluate_carleman_inequality(const WeightFunction& phi, Side side, const UniformGrid& grid,
                                            std::span<const cplx> u, std::span<const double> h_grid);

/// Random smooth real u: (x − a)·Σ_{k≤5} c_k cos(kπ(x − a)/(b − a)) for the
/// left side, the mirror image for the right side. c_k ~ N(0,1)/(1+k).
std::vector<Grid> random_admissible_samples(Side side, const UniformGrid& grid, int count, std::uint64_t seed);

struct CarlemanEstimate {
    std::vector<double> h_grid;
    /// ratio_sup_per_h[k] = sup over samples at h_grid[k] (sorted ascending).
    std::vector<double> ratio_sup_per_h;
    std::vector<CarlemanReport> samples;
    double C_hat = 0.0;
    double h0_hat = 0.0;
    /// Sample index and h attaining C_hat (−1 / 0 when C_hat = 0).
    int argmax_sample = -1;
    double argmax_h = 0.0;
};

/// h0_hat is the largest h such that every ratio sup up to it is finite and
/// none exceeds ten times the running maximum of the smaller h's. C_hat is the
/// sup of all ratios with h ≤ h0_hat.
CarlemanEstimate estimate_carleman_constant(const WeightFunction& phi, Side side, const UniformGrid& grid,
                                            std::span<const Grid> samples, std::span<const double> h_grid);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

} // namespace pwdamp::carleman

#endif
