#ifndef PWDAMP_FREQUENCY_HPP
#define PWDAMP_FREQUENCY_HPP

// Frequency-domain side of the damped string: the explicit solution of
// (A − iμ)U = F, resolvent-norm probing, and the zeros of the characteristic
// function D(z) = sin z + i·sin(ξz)·sin((1−ξ)z).

#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pwdamp/mesh.hpp"

namespace pwdamp::frequency {

using cplx = std::complex<double>;
using ComplexGrid = std::vector<cplx>;

/// Right-hand side (f, g) of the resolvent equation. Left arrays live on the
/// n_left + 1 nodes of [0,ξ], right arrays on the n_right + 1 nodes of [ξ,1].
struct ForcingData {
    Mesh mesh;
    ComplexGrid f1, f2, g1, g2;
};

ForcingData zero_forcing(const Mesh& mesh);

/// Throws MeshMismatch on wrong array sizes and std::invalid_argument when
/// f₁(0) or f₂(1) is nonzero.
void validate_forcing(const ForcingData& forcing);

/// Φᵢ = gᵢ + iμfᵢ.
struct PhiData {
    Mesh mesh;
    double mu = 0.0;
    ComplexGrid phi1, phi2;
};

PhiData assemble_phi(const ForcingData& forcing, double mu);

/// Which closed form to use for λ₂. `as_printed` reproduces the published
/// display, whose i·sin(μ(1−ξ)) factor does not satisfy the interface
/// conditions unless ξ = 1/2; `corrected` uses i·sin(μξ).
enum class LambdaFormula { corrected, as_printed };

struct ResolventOptions {
    double denominator_floor = 1e-14;
    LambdaFormula formula = LambdaFormula::corrected;
};

struct LambdaPair {
    cplx lambda1;
    cplx lambda2;
};

/// sin²(μ) + sin²(μξ)·sin²(μ(1−ξ)) = |D(μ)|².
double resonance_denominator(double xi, double mu);

/// Coefficients of the homogeneous parts sin(μx) and sin(μ(x−1)). Integrals
/// are composite Simpson on Φ's mesh. Throws ResonantDenominator when the
/// denominator is at or below options.denominator_floor.
LambdaPair lambda_coefficients(double xi, double mu, const PhiData& phi, cplx f1_at_xi,
                               const ResolventOptions& options = {});

struct ResolventSolution {
    Mesh mesh;
    double mu = 0.0;
    ComplexGrid u1, u2, v1, v2;
    /// Exact derivatives of the variation-of-constants formulas at the nodes.
    ComplexGrid du1, du2;
    cplx lambda1, lambda2;
    cplx u_at_xi;
    cplx du1_at_xi;
    cplx du2_at_xi;
};

/// Explicit solution u₁ = λ₁sin(μx) + (1/μ)∫₀ˣ sin(μ(x−t))Φ₁, u₂ analogous,
/// vᵢ = fᵢ + iμuᵢ. Running integrals are fourth order.
ResolventSolution solve_resolvent(double xi, double mu, const ForcingData& forcing,
                                  const ResolventOptions& options = {});

/// Closed-form traces u₁'(ξ), u₂'(ξ) from the solution's λ's and Φ.
std::pair<cplx, cplx> trace_derivatives(const ResolventSolution& sol, const PhiData& phi);

/// Absolute residuals of every equation of the boundary value problem.
struct BvpResiduals {
    double ode = 0.0;        ///< max |u'' + μ²u − Φ| over interior nodes (u'' by second differences)
    double boundary = 0.0;   ///< max(|u₁(0)|, |u₂(1)|)
    double continuity = 0.0; ///< |u₁(ξ) − u₂(ξ)|
    double jump = 0.0;       ///< |u₂'(ξ) − u₁'(ξ) − f₁(ξ) − iμu₁(ξ)|
    double velocity = 0.0;   ///< max |vᵢ − fᵢ − iμuᵢ|
};

BvpResiduals bvp_residuals(const ResolventSolution& sol, const ForcingData& forcing);

struct InterfaceIdentityReport {
    cplx lhs;
    cplx rhs;
    double identity_residual = 0.0;
    /// Largest magnitude among the terms on both sides.
    double scale = 0.0;
    /// μ|u₁(ξ)|² / (|f₁(ξ)|² + ‖Φ₁‖‖u₁‖ + ‖Φ₂‖‖u₂‖); 0 for zero data.
    double bound_ratio = 0.0;
    double bound_constant = 3.0;
    bool bound_holds = true;
};

/// Energy identity obtained by testing the ODEs against ū and integrating by
/// parts, plus the interface-trace bound that follows from its imaginary part.
InterfaceIdentityReport verify_interface_identity(const ResolventSolution& sol, const PhiData& phi, cplx f1_at_xi,
                                                  double mu, double bound_constant = 3.0);

/// ‖(u,v)‖² = ∫|u'|² + ∫|v|² over both sides.
double state_norm(const ResolventSolution& sol);
/// ‖(f,g)‖² = ∫|f'|² + ∫|g|², f' by fourth-order differences.
double forcing_norm(const ForcingData& forcing);

ForcingData scaled(const ForcingData& forcing, cplx factor);

/// Probe set at frequency μ: the resonant modes sin(μx) on [0,ξ] and
/// sin(μ(x−1)) on [ξ,1] (as g), then random band-limited forcings. Each probe
/// is normalized to unit state-space norm.
std::vector<ForcingData> make_probes(const Mesh& mesh, double mu, int count, std::uint64_t seed);

/// max over probes of ‖(A − iμ)⁻¹F‖/‖F‖, a lower bound for the resolvent norm.
/// Returns +∞ when μ is resonant. Throws std::invalid_argument on a zero probe.
double resolvent_norm_lower_bound(double xi, double mu, std::span<const ForcingData> probes,
                                  const ResolventOptions& options = {});

struct ScanOptions {
    int n_per_side = 2048;
    std::uint64_t seed = 1;
    ResolventOptions resolvent;
};

struct GrowthScan {
    std::vector<double> mu;
    std::vector<double> norm_estimate;
    /// Least-squares fit log‖R(iμ)‖ ≈ log C + Kμ over the finite estimates.
    double C = 0.0;
    double K = 0.0;
    double fit_residual = 0.0;
    std::size_t fitted_points = 0;
};

GrowthScan scan_resolvent_growth(double xi, std::span<const double> mu_grid, int probes_per_mu,
                                 const ScanOptions& options = {});

// ---------------------------------------------------------------------------
// Spectrum

/// D(z) = sin z + i·sin(ξz)·sin((1−ξ)z). On the real axis |D(μ)|² is the
/// M-expression. Its zeros are the points iz of the spectrum of the damped
/// generator, except the removable zero at z = 0.
cplx characteristic_function(double xi, cplx z);
cplx characteristic_derivative(double xi, cplx z);

struct Rect {
    double re_min = 0.0;
    double re_max = 0.0;
    double im_min = 0.0;
    double im_max = 0.0;
};

struct CharacteristicRoot {
    cplx z;
    double residual = 0.0;
    int multiplicity = 1;
};

struct RootOptions {
    double tol = 1e-10;
    double min_size = 1e-7;
    int newton_max_iter = 100;
    double damping = 0.5;
    int max_nudges = 12;
};

struct RootSearch {
    std::vector<CharacteristicRoot> roots;
    /// Winding number of D around the contour actually used.
    int winding_number = 0;
    /// The rectangle after any boundary nudging.
    Rect contour;
};

/// Winding number of D around the rectangle (counterclockwise). Throws
/// ContourThroughRoot when the boundary passes through or next to a zero.
int winding_number(double xi, const Rect& rect);

/// All zeros of D inside the rectangle: argument-principle bisection down to
/// winding number one, then damped Newton. Edges that hit a zero are nudged;
/// throws ContourThroughRoot when nudging fails.
RootSearch find_eigenvalues(double xi, const Rect& rect, const RootOptions& options = {});

/// max −Im z over zeros in [0,R]×[−1, im_max] excluding z = 0. Returns 0 when
/// a real zero exists and −∞ when there are none.
double spectral_abscissa(double xi, double R, const RootOptions& options = {}, double im_max = 5.0);

} // namespace pwdamp::frequency

#endif
