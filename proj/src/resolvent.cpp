#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "pwdamp/errors.hpp"
#include "pwdamp/frequency.hpp"
#include "pwdamp/numerics.hpp"

namespace pwdamp::frequency {

namespace num = pwdamp::numerics;

namespace {

constexpr cplx I{0.0, 1.0};

std::span<const cplx> view(const ComplexGrid& g) { return {g.data(), g.size()}; }

void check_sizes(const Mesh& mesh, const ComplexGrid& left, const ComplexGrid& right, const char* what)
{
    if (left.size() != static_cast<std::size_t>(mesh.n_left) + 1 ||
        right.size() != static_cast<std::size_t>(mesh.n_right) + 1)
        throw MeshMismatch(std::string(what) + ": grid sizes do not match the mesh");
}

// ∫ kernel(t)·Φ(t) dt over the nodes of one side.
template <typename Kernel>
cplx integrate(std::span<const double> x, const ComplexGrid& phi, double dx, Kernel kernel)
{
    ComplexGrid g(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) g[j] = kernel(x[j]) * phi[j];
    return num::simpson(view(g), dx);
}

struct Brackets {
    cplx sine;   // ∫₀^ξ sin(μ(ξ−t))Φ₁ + ∫_ξ^1 sin(μ(ξ−t))Φ₂
    cplx cosine; // ∫₀^ξ e^{iμ(ξ−t)}Φ₁ + ∫_ξ^1 cos(μ(ξ−t))Φ₂ + f₁(ξ)
};

Brackets brackets(double xi, double mu, const PhiData& phi, cplx f1_at_xi)
{
    const Mesh& m = phi.mesh;
    const auto xl = m.left_nodes();
    const auto xr = m.right_nodes();
    Brackets b;
    b.sine = integrate(xl, phi.phi1, m.h_left, [&](double t) { return cplx(std::sin(mu * (xi - t))); }) +
             integrate(xr, phi.phi2, m.h_right, [&](double t) { return cplx(std::sin(mu * (xi - t))); });
    b.cosine = integrate(xl, phi.phi1, m.h_left, [&](double t) { return std::exp(I * (mu * (xi - t))); }) +
               integrate(xr, phi.phi2, m.h_right, [&](double t) { return cplx(std::cos(mu * (xi - t))); }) +
               f1_at_xi;
    return b;
}

} // namespace

ForcingData zero_forcing(const Mesh& mesh)
{
    ForcingData f;
    f.mesh = mesh;
    f.f1.assign(static_cast<std::size_t>(mesh.n_left) + 1, cplx{});
    f.g1 = f.f1;
    f.f2.assign(static_cast<std::size_t>(mesh.n_right) + 1, cplx{});
    f.g2 = f.f2;
    return f;
}

void validate_forcing(const ForcingData& forcing)
{
    check_sizes(forcing.mesh, forcing.f1, forcing.f2, "forcing f");
    check_sizes(forcing.mesh, forcing.g1, forcing.g2, "forcing g");
    const double scale = 1.0 + std::max(std::abs(forcing.f1.back()), std::abs(forcing.f2.front()));
    if (std::abs(forcing.f1.front()) > 1e-12 * scale || std::abs(forcing.f2.back()) > 1e-12 * scale)
        throw std::invalid_argument("forcing: f must vanish at x=0 and x=1");
}

PhiData assemble_phi(const ForcingData& forcing, double mu)
{
    check_sizes(forcing.mesh, forcing.f1, forcing.f2, "assemble_phi f");
    check_sizes(forcing.mesh, forcing.g1, forcing.g2, "assemble_phi g");
    PhiData phi;
    phi.mesh = forcing.mesh;
    phi.mu = mu;
    phi.phi1.resize(forcing.f1.size());
    phi.phi2.resize(forcing.f2.size());
    for (std::size_t j = 0; j < phi.phi1.size(); ++j) phi.phi1[j] = forcing.g1[j] + I * mu * forcing.f1[j];
    for (std::size_t j = 0; j < phi.phi2.size(); ++j) phi.phi2[j] = forcing.g2[j] + I * mu * forcing.f2[j];
    return phi;
}

double resonance_denominator(double xi, double mu)
{
    const double s = std::sin(mu);
    const double a = std::sin(mu * xi) * std::sin(mu * (1.0 - xi));
    return s * s + a * a;
}

LambdaPair lambda_coefficients(double xi, double mu, const PhiData& phi, cplx f1_at_xi, const ResolventOptions& options)
{
    const double denom = resonance_denominator(xi, mu);
    if (denom <= options.denominator_floor) throw ResonantDenominator(mu, denom);

    const double s = std::sin(mu);
    const double s1 = std::sin(mu * xi), c1 = std::cos(mu * xi);
    const double s2 = std::sin(mu * (1.0 - xi)), c2 = std::cos(mu * (1.0 - xi));
    // (−sin μ + i·sin(μξ)sin(μ(1−ξ))) / denominator = −1/D(μ)
    const cplx prefactor = cplx(-s, s1 * s2) / denom;

    const Brackets b = brackets(xi, mu, phi, f1_at_xi);
    LambdaPair out;
    out.lambda1 = prefactor * (c2 / mu * b.sine + s2 / mu * b.cosine);
    const double twist = options.formula == LambdaFormula::corrected ? s1 : s2;
    out.lambda2 = prefactor * (cplx(c1, twist) / mu * b.sine - s1 / mu * b.cosine);
    return out;
}

ResolventSolution solve_resolvent(double xi, double mu, const ForcingData& forcing, const ResolventOptions& options)
{
    if (!(mu > 0.0)) throw std::invalid_argument("solve_resolvent: mu must be positive");
    if (forcing.mesh.xi != xi) throw MeshMismatch("solve_resolvent: forcing mesh is built for a different xi");
    const PhiData phi = assemble_phi(forcing, mu);
    const LambdaPair lam = lambda_coefficients(xi, mu, phi, forcing.f1.back(), options);

    const Mesh& m = forcing.mesh;
    const auto xl = m.left_nodes();
    const auto xr = m.right_nodes();

    ResolventSolution sol;
    sol.mesh = m;
    sol.mu = mu;
    sol.lambda1 = lam.lambda1;
    sol.lambda2 = lam.lambda2;

    // Left: ∫₀ˣ sin(μ(x−t))Φ₁ = sin(μx)·C(x) − cos(μx)·S(x) with C, S the running
    // integrals of cos(μt)Φ₁ and sin(μt)Φ₁.
    {
        const std::size_t n = xl.size();
        ComplexGrid cw(n), sw(n);
        for (std::size_t j = 0; j < n; ++j) {
            cw[j] = std::cos(mu * xl[j]) * phi.phi1[j];
            sw[j] = std::sin(mu * xl[j]) * phi.phi1[j];
        }
        const auto C = num::cumulative_integral(view(cw), m.h_left);
        const auto S = num::cumulative_integral(view(sw), m.h_left);
        sol.u1.resize(n);
        sol.du1.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double sx = std::sin(mu * xl[j]), cx = std::cos(mu * xl[j]);
            sol.u1[j] = lam.lambda1 * sx + (sx * C[j] - cx * S[j]) / mu;
            sol.du1[j] = mu * lam.lambda1 * cx + (cx * C[j] + sx * S[j]);
        }
        sol.u1.front() = 0.0;
    }
    // Right: ∫₁ˣ sin(μ(x−t))Φ₂ = −[sin(μx)·C̃(x) − cos(μx)·S̃(x)] with C̃, S̃ the
    // integrals over [x,1]. The phase is measured from x = 1.
    {
        const std::size_t n = xr.size();
        ComplexGrid cw(n), sw(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double y = xr[j] - 1.0;
            cw[j] = std::cos(mu * y) * phi.phi2[j];
            sw[j] = std::sin(mu * y) * phi.phi2[j];
        }
        const auto C = num::cumulative_integral(view(cw), m.h_right);
        const auto S = num::cumulative_integral(view(sw), m.h_right);
        sol.u2.resize(n);
        sol.du2.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double y = xr[j] - 1.0;
            const double sy = std::sin(mu * y), cy = std::cos(mu * y);
            const cplx Ct = C.back() - C[j];
            const cplx St = S.back() - S[j];
            sol.u2[j] = lam.lambda2 * sy - (sy * Ct - cy * St) / mu;
            sol.du2[j] = mu * lam.lambda2 * cy - (cy * Ct + sy * St);
        }
        sol.u2.back() = 0.0;
    }

    sol.v1.resize(sol.u1.size());
    sol.v2.resize(sol.u2.size());
    for (std::size_t j = 0; j < sol.u1.size(); ++j) sol.v1[j] = forcing.f1[j] + I * mu * sol.u1[j];
    for (std::size_t j = 0; j < sol.u2.size(); ++j) sol.v2[j] = forcing.f2[j] + I * mu * sol.u2[j];

    sol.u_at_xi = sol.u1.back();
    const auto [d1, d2] = trace_derivatives(sol, phi);
    sol.du1_at_xi = d1;
    sol.du2_at_xi = d2;
    return sol;
}

std::pair<cplx, cplx> trace_derivatives(const ResolventSolution& sol, const PhiData& phi)
{
    const Mesh& m = phi.mesh;
    const double xi = m.xi;
    const double mu = sol.mu;
    const cplx int1 = integrate(m.left_nodes(), phi.phi1, m.h_left, [&](double t) { return cplx(std::cos(mu * (xi - t))); });
    const cplx int2 = integrate(m.right_nodes(), phi.phi2, m.h_right, [&](double t) { return cplx(std::cos(mu * (xi - t))); });
    const cplx d1 = mu * sol.lambda1 * std::cos(mu * xi) + int1;
    // ∫₁^ξ = −∫_ξ^1
    const cplx d2 = mu * sol.lambda2 * std::cos(mu * (xi - 1.0)) - int2;
    return {d1, d2};
}

BvpResiduals bvp_residuals(const ResolventSolution& sol, const ForcingData& forcing)
{
    const PhiData phi = assemble_phi(forcing, sol.mu);
    const Mesh& m = sol.mesh;
    const double mu2 = sol.mu * sol.mu;
    BvpResiduals r;

    auto ode_side = [&](const ComplexGrid& u, const ComplexGrid& p, double dx) {
        double worst = 0.0;
        for (std::size_t j = 1; j + 1 < u.size(); ++j) {
            const cplx upp = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx);
            worst = std::max(worst, std::abs(upp + mu2 * u[j] - p[j]));
        }
        return worst;
    };
    r.ode = std::max(ode_side(sol.u1, phi.phi1, m.h_left), ode_side(sol.u2, phi.phi2, m.h_right));
    r.boundary = std::max(std::abs(sol.u1.front()), std::abs(sol.u2.back()));
    r.continuity = std::abs(sol.u1.back() - sol.u2.front());
    const auto [d1, d2] = trace_derivatives(sol, phi);
    r.jump = std::abs(d2 - d1 - forcing.f1.back() - I * sol.mu * sol.u1.back());
    for (std::size_t j = 0; j < sol.u1.size(); ++j)
        r.velocity = std::max(r.velocity, std::abs(sol.v1[j] - forcing.f1[j] - I * sol.mu * sol.u1[j]));
    for (std::size_t j = 0; j < sol.u2.size(); ++j)
        r.velocity = std::max(r.velocity, std::abs(sol.v2[j] - forcing.f2[j] - I * sol.mu * sol.u2[j]));
    return r;
}

InterfaceIdentityReport verify_interface_identity(const ResolventSolution& sol, const PhiData& phi, cplx f1_at_xi,
                                                  double mu, double bound_constant)
{
    const Mesh& m = sol.mesh;
    auto inner = [](const ComplexGrid& a, const ComplexGrid& b, double dx) {
        ComplexGrid g(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) g[j] = a[j] * std::conj(b[j]);
        return num::simpson(view(g), dx);
    };

    const cplx lhs = inner(phi.phi1, sol.u1, m.h_left) + inner(phi.phi2, sol.u2, m.h_right);
    const double u_sq = num::l2_squared(view(sol.u1), m.h_left) + num::l2_squared(view(sol.u2), m.h_right);
    const double du_sq = num::l2_squared(view(sol.du1), m.h_left) + num::l2_squared(view(sol.du2), m.h_right);
    const cplx u_xi = sol.u1.back();
    const double trace_sq = std::norm(u_xi);
    const cplx rhs = mu * mu * u_sq - du_sq - I * mu * trace_sq - f1_at_xi * std::conj(u_xi);

    InterfaceIdentityReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.identity_residual = std::abs(lhs - rhs);
    rep.scale = std::max({std::abs(lhs), mu * mu * u_sq, du_sq, mu * trace_sq, std::abs(f1_at_xi) * std::abs(u_xi)});

    const double phi1 = std::sqrt(num::l2_squared(view(phi.phi1), m.h_left));
    const double phi2 = std::sqrt(num::l2_squared(view(phi.phi2), m.h_right));
    const double u1 = std::sqrt(num::l2_squared(view(sol.u1), m.h_left));
    const double u2 = std::sqrt(num::l2_squared(view(sol.u2), m.h_right));
    const double denom = std::norm(f1_at_xi) + phi1 * u1 + phi2 * u2;
    rep.bound_constant = bound_constant;
    rep.bound_ratio = denom > 0.0 ? mu * trace_sq / denom : 0.0;
    rep.bound_holds = rep.bound_ratio <= bound_constant;
    return rep;
}

double state_norm(const ResolventSolution& sol)
{
    const Mesh& m = sol.mesh;
    const double sq = num::l2_squared(view(sol.du1), m.h_left) + num::l2_squared(view(sol.du2), m.h_right) +
                      num::l2_squared(view(sol.v1), m.h_left) + num::l2_squared(view(sol.v2), m.h_right);
    return std::sqrt(sq);
}

double forcing_norm(const ForcingData& forcing)
{
    const Mesh& m = forcing.mesh;
    const auto df1 = num::derivative4(view(forcing.f1), m.h_left);
    const auto df2 = num::derivative4(view(forcing.f2), m.h_right);
    const double sq = num::l2_squared(view(df1), m.h_left) + num::l2_squared(view(df2), m.h_right) +
                      num::l2_squared(view(forcing.g1), m.h_left) + num::l2_squared(view(forcing.g2), m.h_right);
    return std::sqrt(sq);
}

ForcingData scaled(const ForcingData& forcing, cplx factor)
{
    ForcingData out = forcing;
    for (auto* g : {&out.f1, &out.f2, &out.g1, &out.g2})
        for (auto& v : *g) v *= factor;
    return out;
}

std::vector<ForcingData> make_probes(const Mesh& mesh, double mu, int count, std::uint64_t seed)
{
    std::vector<ForcingData> probes;
    if (count <= 0) return probes;

    const auto xl = mesh.left_nodes();
    const auto xr = mesh.right_nodes();
    auto normalize = [](ForcingData f) { return scaled(f, 1.0 / forcing_norm(f)); };

    {
        ForcingData p = zero_forcing(mesh);
        for (std::size_t j = 0; j < xl.size(); ++j) p.g1[j] = std::sin(mu * xl[j]);
        probes.push_back(normalize(std::move(p)));
    }
    if (count >= 2) {
        ForcingData p = zero_forcing(mesh);
        for (std::size_t j = 0; j < xr.size(); ++j) p.g2[j] = std::sin(mu * (xr[j] - 1.0));
        probes.push_back(normalize(std::move(p)));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    constexpr int modes = 6;
    constexpr double pi = 3.14159265358979323846;
    while (static_cast<int>(probes.size()) < count) {
        cplx cf[modes], cg[modes];
        for (int k = 0; k < modes; ++k) {
            cf[k] = cplx(normal(rng), normal(rng)) / double(k + 1);
            cg[k] = cplx(normal(rng), normal(rng)) / double(k + 1);
        }
        // f = Σ c_k sin(kπx) vanishes at both ends and is continuous across ξ.
        auto f_at = [&](double x) {
            cplx s{};
            for (int k = 0; k < modes; ++k) s += cf[k] * std::sin((k + 1) * pi * x);
            return s;
        };
        auto g_at = [&](double x) {
            cplx s{};
            for (int k = 0; k < modes; ++k) s += cg[k] * std::cos(k * pi * x);
            return s;
        };
        ForcingData p = zero_forcing(mesh);
        for (std::size_t j = 0; j < xl.size(); ++j) {
            p.f1[j] = f_at(xl[j]);
            p.g1[j] = g_at(xl[j]);
        }
        for (std::size_t j = 0; j < xr.size(); ++j) {
            p.f2[j] = f_at(xr[j]);
            p.g2[j] = g_at(xr[j]);
        }
        p.f1.front() = 0.0;
        p.f2.back() = 0.0;
        probes.push_back(normalize(std::move(p)));
    }
    return probes;
}

double resolvent_norm_lower_bound(double xi, double mu, std::span<const ForcingData> probes,
                                  const ResolventOptions& options)
{
    double best = 0.0;
    for (const ForcingData& probe : probes) {
        const double fn = forcing_norm(probe);
        if (!(fn > 0.0)) throw std::invalid_argument("resolvent_norm_lower_bound: zero probe");
        try {
            const ResolventSolution sol = solve_resolvent(xi, mu, probe, options);
            best = std::max(best, state_norm(sol) / fn);
        } catch (const ResonantDenominator&) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return best;
}

GrowthScan scan_resolvent_growth(double xi, std::span<const double> mu_grid, int probes_per_mu,
                                 const ScanOptions& options)
{
    if (!std::is_sorted(mu_grid.begin(), mu_grid.end())) throw std::invalid_argument("scan_resolvent_growth: grid must be sorted");
    const Mesh mesh = build_mesh(xi, options.n_per_side);

    GrowthScan scan;
    scan.mu.assign(mu_grid.begin(), mu_grid.end());
    scan.norm_estimate.resize(mu_grid.size());
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
        const std::uint64_t seed = options.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1));
        const auto probes = make_probes(mesh, mu_grid[i], probes_per_mu, seed);
        scan.norm_estimate[i] = resolvent_norm_lower_bound(xi, mu_grid[i], probes, options.resolvent);
    }

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < scan.mu.size(); ++i) {
        if (std::isfinite(scan.norm_estimate[i]) && scan.norm_estimate[i] > 0.0) {
            xs.push_back(scan.mu[i]);
            ys.push_back(std::log(scan.norm_estimate[i]));
        }
    }
    scan.fitted_points = xs.size();
    if (xs.empty()) return scan;
    if (xs.size() == 1) {
        scan.C = std::exp(ys[0]);
        scan.K = 0.0;
        return scan;
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    scan.K = sxx > 0.0 ? sxy / sxx : 0.0;
    const double logC = my - scan.K * mx;
    scan.C = std::exp(logC);
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (logC + scan.K * xs[i]);
        ss += r * r;
    }
    scan.fit_residual = std::sqrt(ss / n);
    return scan;
}

} // namespace pwdamp::frequency
