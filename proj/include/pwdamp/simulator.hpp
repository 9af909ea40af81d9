#ifndef PWDAMP_SIMULATOR_HPP
#define PWDAMP_SIMULATOR_HPP

// Time-domain solver for the string with a point damper at ξ:
//   u_tt = u_xx on (0,ξ) ∪ (ξ,1),  u(0) = u(1) = 0,
//   u continuous at ξ,  u_x(ξ⁺) − u_x(ξ⁻) = u_t(ξ).
// Lumped-mass linear elements in space and implicit midpoint in time. The
// discrete energy drops by exactly dt·|v_ξ^{n+1/2}|² per step.

#include <span>
#include <utility>
#include <vector>

#include "pwdamp/mesh.hpp"

namespace pwdamp::simulator {

struct WaveState {
    std::vector<double> u;
    std::vector<double> v;
    double t = 0.0;
};

struct EnergyTrace {
    std::vector<double> t;
    std::vector<double> E;
    /// |u_t(ξ, t)|² at the sample times.
    std::vector<double> damping;
    /// Σ dt·|v_ξ^{k+1/2}|² over the steps up to each sample: the energy the
    /// scheme removed through the damper.
    std::vector<double> dissipated;
    double dt = 0.0;
};

struct InitialData {
    enum class Kind { fourier_mode, smooth_bump, custom };
    Kind kind = Kind::fourier_mode;
    int k = 1;
    double center = 0.5;
    double width = 0.1;
    /// Custom tables: x strictly increasing, covering [0,1]; u(0) = u(1) = 0.
    std::vector<double> x, u, v;

    static InitialData fourier_mode(int k);
    static InitialData smooth_bump(double center, double width);
    static InitialData custom(std::vector<double> x, std::vector<double> u, std::vector<double> v = {});
};

/// u = sin(kπx) for fourier_mode; u = (1 − r²)³ with r = (x − c)/w inside
/// |r| < 1 for smooth_bump; linear interpolation for custom. v = 0 unless a
/// custom velocity table is given. Throws std::invalid_argument for data
/// incompatible with the Dirichlet ends.
WaveState initial_data(const InitialData& data, const Mesh& mesh);

/// ½Σ m_j v_j² + ½Σ (Δu)²/Δx: trapezoid for ∫v², exact ∫u_x² for the
/// piecewise-linear interpolant.
double energy(const WaveState& state, const Mesh& mesh);

class Stepper {
public:
    /// Factors (M + dt²/4 K + dt/2 B) once. Throws LinearSolveError when a
    /// pivot is not positive.
    Stepper(const Mesh& mesh, double dt);

    /// Advances state by dt; returns |v_ξ^{n+1/2}|².
    double advance(WaveState& state) const;

    /// Same value as energy(state, mesh()) without rebuilding the weights.
    double energy(const WaveState& state) const;

    double dt() const { return dt_; }
    const Mesh& mesh() const { return mesh_; }

private:
    Mesh mesh_;
    double dt_;
    std::vector<double> mass_;
    std::vector<double> inv_h_;     // 1/Δx per cell
    std::vector<double> diag_;      // factored diagonal (interior nodes)
    std::vector<double> inv_diag_;
    std::vector<double> lower_;     // elimination multipliers
    std::vector<double> upper_;     // off-diagonal of the system matrix
    // Per-step work arrays; a Stepper is not shared between threads.
    mutable std::vector<double> scratch_w_, scratch_rhs_, scratch_v_;
};

/// One step of the scheme (builds a Stepper; use Stepper for loops).
WaveState step(const WaveState& state, double dt, const Mesh& mesh);

/// dt = min spacing / 2.
double default_dt(const Mesh& mesh);

struct SimulateOptions {
    /// Record every stride-th step (the last step is always recorded).
    int sample_stride = 1;
};

/// Runs to t = T with ⌈T/dt⌉ equal steps (dt is shrunk to land on T exactly;
/// the value used is trace.dt). T = 0 gives a single sample.
std::pair<EnergyTrace, WaveState> simulate(const Mesh& mesh, const WaveState& init, double T, double dt,
                                           const SimulateOptions& options = {});

enum class DissipationQuadrature {
    /// The scheme's own midpoint record; the identity holds to rounding.
    midpoint,
    /// Trapezoid over the sampled |u_t(ξ,t)|²; O(dt²) consistent.
    trapezoid
};

/// |E(t₁) − E(t₂) − ∫_{t₁}^{t₂} |u_t(ξ,t)|² dt| using the samples nearest
/// to t₁ and t₂. Throws std::invalid_argument unless t₁ < t₂ lie in range.
double dissipation_residual(const EnergyTrace& trace, double t1, double t2,
                            DissipationQuadrature quadrature = DissipationQuadrature::midpoint);

/// Mirror about x = ½: state on build_mesh(1 − ξ, n_right, n_left).
WaveState mirrored(const WaveState& state);

} // namespace pwdamp::simulator

#endif
