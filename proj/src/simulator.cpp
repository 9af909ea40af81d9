#include "pwdamp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "pwdamp/errors.hpp"

namespace pwdamp::simulator {

namespace {

void require_state(const WaveState& s, const Mesh& mesh)
{
    if (s.u.size() != mesh.size() || s.v.size() != mesh.size())
        throw MeshMismatch("wave state has " + std::to_string(s.u.size()) + " nodes, mesh has " +
                           std::to_string(mesh.size()));
}

std::vector<double> cell_inverse_widths(const Mesh& mesh)
{
    std::vector<double> inv(mesh.size() - 1);
    for (std::size_t c = 0; c < inv.size(); ++c)
        inv[c] = 1.0 / (c < static_cast<std::size_t>(mesh.n_left) ? mesh.h_left : mesh.h_right);
    return inv;
}

std::vector<double> lumped_mass(const Mesh& mesh)
{
    std::vector<double> m(mesh.size(), 0.0);
    for (std::size_t c = 0; c + 1 < mesh.size(); ++c) {
        const double h = c < static_cast<std::size_t>(mesh.n_left) ? mesh.h_left : mesh.h_right;
        m[c] += 0.5 * h;
        m[c + 1] += 0.5 * h;
    }
    return m;
}

double interpolate(std::span<const double> xs, std::span<const double> ys, double x)
{
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return (1.0 - t) * ys[k - 1] + t * ys[k];
}

std::size_t nearest_sample(const std::vector<double>& t, double target)
{
    const auto it = std::lower_bound(t.begin(), t.end(), target);
    if (it == t.begin()) return 0;
    if (it == t.end()) return t.size() - 1;
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    return (target - t[k - 1] <= t[k] - target) ? k - 1 : k;
}

} // namespace

InitialData InitialData::fourier_mode(int k)
{
    InitialData d;
    d.kind = Kind::fourier_mode;
    d.k = k;
    return d;
}

InitialData InitialData::smooth_bump(double center, double width)
{
    InitialData d;
    d.kind = Kind::smooth_bump;
    d.center = center;
    d.width = width;
    return d;
}

InitialData InitialData::custom(std::vector<double> x, std::vector<double> u, std::vector<double> v)
{
    InitialData d;
    d.kind = Kind::custom;
    d.x = std::move(x);
    d.u = std::move(u);
    d.v = std::move(v);
    return d;
}

WaveState initial_data(const InitialData& data, const Mesh& mesh)
{
    WaveState s;
    s.u.assign(mesh.size(), 0.0);
    s.v.assign(mesh.size(), 0.0);
    switch (data.kind) {
    case InitialData::Kind::fourier_mode:
        if (data.k < 1) throw std::invalid_argument("initial_data: mode number must be positive");
        for (std::size_t j = 0; j < mesh.size(); ++j) s.u[j] = std::sin(data.k * std::numbers::pi * mesh.nodes[j]);
        break;
    case InitialData::Kind::smooth_bump:
        if (!(data.width > 0.0) || data.center - data.width < 0.0 || data.center + data.width > 1.0)
            throw std::invalid_argument("initial_data: bump support must lie inside [0,1]");
        for (std::size_t j = 0; j < mesh.size(); ++j) {
            const double r = (mesh.nodes[j] - data.center) / data.width;
            if (std::abs(r) < 1.0) s.u[j] = std::pow(1.0 - r * r, 3);
        }
        break;
    case InitialData::Kind::custom: {
        const std::size_t n = data.x.size();
        if (n < 2 || data.u.size() != n || (!data.v.empty() && data.v.size() != n))
            throw std::invalid_argument("initial_data: custom table columns must have equal length >= 2");
        for (std::size_t i = 1; i < n; ++i)
            if (!(data.x[i] > data.x[i - 1])) throw std::invalid_argument("initial_data: custom x must increase");
        if (data.x.front() > 0.0 || data.x.back() < 1.0)
            throw std::invalid_argument("initial_data: custom table must cover [0,1]");
        for (std::size_t j = 0; j < mesh.size(); ++j) {
            s.u[j] = interpolate(data.x, data.u, mesh.nodes[j]);
            if (!data.v.empty()) s.v[j] = interpolate(data.x, data.v, mesh.nodes[j]);
        }
        const double tol = 1e-12;
        if (std::abs(s.u.front()) > tol || std::abs(s.u.back()) > tol || std::abs(s.v.front()) > tol ||
            std::abs(s.v.back()) > tol)
            throw std::invalid_argument("initial_data: custom data must vanish at x=0 and x=1");
        break;
    }
    }
    s.u.front() = s.u.back() = 0.0;
    s.v.front() = s.v.back() = 0.0;
    return s;
}

double energy(const WaveState& state, const Mesh& mesh)
{
    require_state(state, mesh);
    const auto m = lumped_mass(mesh);
    const auto inv = cell_inverse_widths(mesh);
    double kinetic = 0.0, potential = 0.0;
    for (std::size_t j = 0; j < mesh.size(); ++j) kinetic += m[j] * state.v[j] * state.v[j];
    for (std::size_t c = 0; c < inv.size(); ++c) {
        const double du = state.u[c + 1] - state.u[c];
        potential += du * du * inv[c];
    }
    return 0.5 * (kinetic + potential);
}

Stepper::Stepper(const Mesh& mesh, double dt) : mesh_(mesh), dt_(dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("Stepper: dt must be positive");
    if (mesh.size() < 3) throw std::invalid_argument("Stepper: mesh needs an interior node");
    mass_ = lumped_mass(mesh);
    inv_h_ = cell_inverse_widths(mesh);

    const std::size_t n = mesh.size();
    const double q = 0.25 * dt * dt;
    diag_.assign(n, 0.0);
    lower_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    const std::size_t ix = mesh.interface_index();
    for (std::size_t j = 1; j + 1 < n; ++j) {
        diag_[j] = mass_[j] + q * (inv_h_[j - 1] + inv_h_[j]) + (j == ix ? 0.5 * dt : 0.0);
        upper_[j] = -q * inv_h_[j]; // coupling j ↔ j+1
    }
    // Forward elimination once; advance() only substitutes.
    for (std::size_t j = 2; j + 1 < n; ++j) {
        if (!(diag_[j - 1] > 0.0)) throw LinearSolveError("Stepper: nonpositive pivot");
        lower_[j] = upper_[j - 1] / diag_[j - 1];
        diag_[j] -= lower_[j] * upper_[j - 1];
    }
    if (!(diag_[n - 2] > 0.0)) throw LinearSolveError("Stepper: nonpositive pivot");
    inv_diag_.assign(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) inv_diag_[j] = 1.0 / diag_[j];
}

double Stepper::energy(const WaveState& state) const
{
    double kinetic = 0.0, potential = 0.0;
    for (std::size_t j = 0; j < mass_.size(); ++j) kinetic += mass_[j] * state.v[j] * state.v[j];
    for (std::size_t c = 0; c < inv_h_.size(); ++c) {
        const double du = state.u[c + 1] - state.u[c];
        potential += du * du * inv_h_[c];
    }
    return 0.5 * (kinetic + potential);
}

double Stepper::advance(WaveState& s) const
{
    const std::size_t n = mesh_.size();
    const std::size_t ix = mesh_.interface_index();
    const double q = 0.25 * dt_ * dt_;
    std::vector<double>& w = scratch_w_;
    std::vector<double>& rhs = scratch_rhs_;
    std::vector<double>& v_new = scratch_v_;
    w.resize(n);
    rhs.resize(n);
    v_new.resize(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = q * s.v[j] + dt_ * s.u[j];
    // rhs = M v − dt/2 B v − K w, forward-eliminated on the fly
    rhs[0] = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double kw = (w[j] - w[j - 1]) * inv_h_[j - 1] - (w[j + 1] - w[j]) * inv_h_[j];
        const double damper = j == ix ? 0.5 * dt_ * s.v[j] : 0.0;
        rhs[j] = mass_[j] * s.v[j] - kw - damper - lower_[j] * rhs[j - 1];
    }
    v_new[0] = v_new[n - 1] = 0.0;
    v_new[n - 2] = rhs[n - 2] * inv_diag_[n - 2];
    for (std::size_t j = n - 2; j-- > 1;) v_new[j] = (rhs[j] - upper_[j] * v_new[j + 1]) * inv_diag_[j];

    const double v_mid = 0.5 * (s.v[ix] + v_new[ix]);
    const double half = 0.5 * dt_;
    for (std::size_t j = 1; j + 1 < n; ++j) s.u[j] += half * (s.v[j] + v_new[j]);
    s.v.swap(v_new);
    s.t += dt_;
    return v_mid * v_mid;
}

WaveState step(const WaveState& state, double dt, const Mesh& mesh)
{
    require_state(state, mesh);
    WaveState out = state;
    Stepper(mesh, dt).advance(out);
    return out;
}

double default_dt(const Mesh& mesh) { return 0.5 * mesh.min_spacing(); }

std::pair<EnergyTrace, WaveState> simulate(const Mesh& mesh, const WaveState& init, double T, double dt,
                                           const SimulateOptions& options)
{
    require_state(init, mesh);
    if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("simulate: T must be nonnegative");
    if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
    const int stride = std::max(options.sample_stride, 1);

    EnergyTrace trace;
    WaveState state = init;
    const std::size_t ix = mesh.interface_index();
    std::function<double(const WaveState&)> energy_of = [&](const WaveState& s) { return energy(s, mesh); };
    auto record = [&](double dissipated) {
        trace.t.push_back(state.t);
        trace.E.push_back(energy_of(state));
        trace.damping.push_back(state.v[ix] * state.v[ix]);
        trace.dissipated.push_back(dissipated);
    };
    record(0.0);
    if (T == 0.0) {
        trace.dt = dt;
        return {std::move(trace), std::move(state)};
    }

    const long steps = std::max(1L, static_cast<long>(std::ceil(T / dt - 1e-9)));
    const double t0 = state.t;
    const Stepper stepper(mesh, T / static_cast<double>(steps));
    energy_of = [&](const WaveState& s) { return stepper.energy(s); };
    trace.dt = stepper.dt();
    double dissipated = 0.0;
    for (long k = 1; k <= steps; ++k) {
        dissipated += stepper.dt() * stepper.advance(state);
        if (k == steps) state.t = t0 + T; // remove accumulated rounding in t
        if (k % stride == 0 || k == steps) record(dissipated);
    }
    return {std::move(trace), std::move(state)};
}

double dissipation_residual(const EnergyTrace& trace, double t1, double t2, DissipationQuadrature quadrature)
{
    if (trace.t.empty()) throw std::invalid_argument("dissipation_residual: empty trace");
    if (!(t1 < t2)) throw std::invalid_argument("dissipation_residual: need t1 < t2");
    const double slack = 0.5 * trace.dt + 1e-12;
    if (t1 < trace.t.front() - slack || t2 > trace.t.back() + slack)
        throw std::invalid_argument("dissipation_residual: window outside the trace");
    const std::size_t i1 = nearest_sample(trace.t, t1);
    const std::size_t i2 = nearest_sample(trace.t, t2);
    double integral = 0.0;
    if (quadrature == DissipationQuadrature::midpoint) {
        integral = trace.dissipated[i2] - trace.dissipated[i1];
    } else {
        for (std::size_t k = i1; k < i2; ++k)
            integral += 0.5 * (trace.t[k + 1] - trace.t[k]) * (trace.damping[k] + trace.damping[k + 1]);
    }
    return std::abs(trace.E[i1] - trace.E[i2] - integral);
}

WaveState mirrored(const WaveState& state)
{
    WaveState m = state;
    std::reverse(m.u.begin(), m.u.end());
    std::reverse(m.v.begin(), m.v.end());
    return m;
}

} // namespace pwdamp::simulator
