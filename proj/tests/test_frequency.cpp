#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pwdamp/diophantine.hpp"
#include "pwdamp/errors.hpp"
#include "pwdamp/frequency.hpp"

using namespace pwdamp;
using namespace pwdamp::frequency;
using std::numbers::pi;

namespace {

const double golden = diophantine::golden_xi;
const cplx I{0.0, 1.0};

ForcingData left_constant_g(const Mesh& mesh, cplx value)
{
    ForcingData f = zero_forcing(mesh);
    std::fill(f.g1.begin(), f.g1.end(), value);
    return f;
}

} // namespace

TEST_SUITE("frequency")
{
    TEST_CASE("assemble_phi: zero forcing")
    {
        const Mesh mesh = build_mesh(0.4, 10, 15);
        const PhiData phi = assemble_phi(zero_forcing(mesh), 7.0);
        for (auto v : phi.phi1) CHECK(v == cplx{});
        for (auto v : phi.phi2) CHECK(v == cplx{});
    }

    TEST_CASE("assemble_phi: constant f1 at mu = 3 gives 3i")
    {
        const Mesh mesh = build_mesh(golden, 8, 8);
        ForcingData f = zero_forcing(mesh);
        std::fill(f.f1.begin(), f.f1.end(), cplx(1.0));
        const PhiData phi = assemble_phi(f, 3.0);
        for (auto v : phi.phi1) CHECK(std::abs(v - 3.0 * I) == 0.0);
    }

    TEST_CASE("assemble_phi: random forcing pointwise")
    {
        std::mt19937_64 rng(3);
        const Mesh mesh = build_mesh(golden, 40, 30);
        const auto F = oracle::AnalyticForcing::random(rng);
        const ForcingData f = F.sample(mesh);
        const PhiData phi = assemble_phi(f, 10.0);
        for (std::size_t j = 0; j < f.f1.size(); ++j) CHECK(std::abs(phi.phi1[j] - (f.g1[j] + 10.0 * I * f.f1[j])) < 1e-15 * (1 + std::abs(phi.phi1[j])));
        for (std::size_t j = 0; j < f.f2.size(); ++j) CHECK(std::abs(phi.phi2[j] - (f.g2[j] + 10.0 * I * f.f2[j])) < 1e-15 * (1 + std::abs(phi.phi2[j])));
    }

    TEST_CASE("assemble_phi: mismatched arrays")
    {
        ForcingData f = zero_forcing(build_mesh(0.5, 10, 10));
        f.g2.pop_back();
        CHECK_THROWS_AS(assemble_phi(f, 1.0), MeshMismatch);
    }

    TEST_CASE("validate_forcing rejects f not vanishing at the ends")
    {
        ForcingData f = zero_forcing(build_mesh(0.5, 10, 10));
        CHECK_NOTHROW(validate_forcing(f));
        f.f1.front() = 1.0;
        CHECK_THROWS_AS(validate_forcing(f), std::invalid_argument);
    }

    TEST_CASE("lambda_coefficients: zero data")
    {
        const Mesh mesh = build_mesh(golden, 64);
        const auto lam = lambda_coefficients(golden, 10.0, assemble_phi(zero_forcing(mesh), 10.0), 0.0);
        CHECK(lam.lambda1 == cplx{});
        CHECK(lam.lambda2 == cplx{});
    }

    TEST_CASE("lambda_coefficients: exact resonance at xi = 1/2, mu = 2 pi")
    {
        const Mesh mesh = build_mesh(0.5, 64);
        const PhiData phi = assemble_phi(left_constant_g(mesh, 1.0), 2 * pi);
        CHECK_THROWS_AS(lambda_coefficients(0.5, 2 * pi, phi, 0.0), ResonantDenominator);
    }

    TEST_CASE("lambda_coefficients: golden, mu = 10, Phi1 = 1 against the interface oracle")
    {
        const double mu = 10.0;
        const Mesh mesh = build_mesh(golden, 2048);
        const auto lam = lambda_coefficients(golden, mu, assemble_phi(left_constant_g(mesh, 1.0), mu), 0.0);
        const auto [l1, l2] = oracle::lambdas_by_interface(
            golden, mu, [](double) { return cplx(1.0); }, [](double) { return cplx(0.0); }, 0.0);
        CHECK(std::abs(lam.lambda1 - l1) <= 1e-8 * std::abs(l1));
        CHECK(std::abs(lam.lambda2 - l2) <= 1e-8 * std::abs(l2));
    }

    TEST_CASE("lambda_coefficients: random forcings against the interface oracle")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> xi_dist(0.1, 0.9), mu_dist(2.0, 60.0);
        for (int c = 0; c < 10; ++c) {
            const double xi = xi_dist(rng), mu = mu_dist(rng);
            const auto F = oracle::AnalyticForcing::random(rng);
            const Mesh mesh = build_mesh(xi, 2048);
            const auto lam = lambda_coefficients(xi, mu, assemble_phi(F.sample(mesh), mu), F.f(xi));
            auto phi = [&](double x) { return F.phi(x, mu); };
            const auto [l1, l2] = oracle::lambdas_by_interface(xi, mu, phi, phi, F.f(xi));
            CAPTURE(xi);
            CAPTURE(mu);
            CHECK(std::abs(lam.lambda1 - l1) <= 1e-7 * (std::abs(l1) + std::abs(l2)));
            CHECK(std::abs(lam.lambda2 - l2) <= 1e-7 * (std::abs(l1) + std::abs(l2)));
        }
    }

    TEST_CASE("lambda2 as printed violates the interface conditions off the midpoint")
    {
        const double mu = 10.0;
        ResolventOptions printed;
        printed.formula = LambdaFormula::as_printed;

        const Mesh mesh = build_mesh(golden, 1024);
        const ForcingData f = left_constant_g(mesh, 1.0);
        const auto sol = solve_resolvent(golden, mu, f);
        double scale = 0.0;
        for (auto v : sol.u1) scale = std::max(scale, std::abs(v));
        const auto good = bvp_residuals(sol, f);
        const auto bad = bvp_residuals(solve_resolvent(golden, mu, f, printed), f);
        CHECK(good.continuity < 1e-10 * scale);
        CHECK(bad.continuity > 1e-3 * scale);
        CHECK(bad.continuity > 1e6 * good.continuity);

        const Mesh mid = build_mesh(0.5, 1024);
        const ForcingData g = left_constant_g(mid, 1.0);
        const auto a = solve_resolvent(0.5, mu, g);
        const auto b = solve_resolvent(0.5, mu, g, printed);
        CHECK(std::abs(a.lambda2 - b.lambda2) <= 1e-14 * std::abs(a.lambda2));
    }

    TEST_CASE("solve_resolvent: zero forcing gives the zero solution")
    {
        const Mesh mesh = build_mesh(golden, 100);
        const auto sol = solve_resolvent(golden, 12.0, zero_forcing(mesh));
        for (auto v : sol.u1) CHECK(v == cplx{});
        for (auto v : sol.u2) CHECK(v == cplx{});
    }

    TEST_CASE("solve_resolvent: golden, mu = 10, Phi1 = 1 against Numerov on 2000 intervals")
    {
        const double mu = 10.0;
        const int n = 2000;
        const auto sol = solve_resolvent(golden, mu, left_constant_g(build_mesh(golden, n), 1.0));
        const auto fd = oracle::numerov_bvp(
            golden, mu, n, [](double) { return cplx(1.0); }, [](double) { return cplx(0.0); }, 0.0);
        CHECK(oracle::relative_error(sol.u1, sol.u2, fd) <= 1e-6);
    }

    TEST_CASE("solve_resolvent: random forcings against Numerov")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> mu_dist(5.0, 100.0);
        for (int c = 0; c < 5; ++c) {
            const double mu = mu_dist(rng);
            const auto F = oracle::AnalyticForcing::random(rng);
            const auto sol = solve_resolvent(golden, mu, F.sample(build_mesh(golden, 2000)));
            CAPTURE(mu);
            CHECK(oracle::relative_error(sol.u1, sol.u2, oracle::numerov_bvp(golden, mu, 2000, F)) <= 1e-6);
        }
    }

    TEST_CASE("solve_resolvent: residuals under mesh refinement")
    {
        std::mt19937_64 rng(8);
        const auto F = oracle::AnalyticForcing::random(rng);
        const double mu = 20.0;
        // every residual over h² must stay bounded (here: not grow) under refinement
        double prev[3] = {0, 0, 0};
        for (int n : {128, 256, 512}) {
            const ForcingData f = F.sample(build_mesh(golden, n));
            const auto sol = solve_resolvent(golden, mu, f);
            const auto r = bvp_residuals(sol, f);
            const double h = (1.0 - golden) / n;
            const double c[3] = {r.ode / (h * h), r.continuity / (h * h), r.jump / (h * h)};
            CAPTURE(n);
            CHECK(r.boundary == 0.0);
            CHECK(r.velocity <= 1e-12);
            for (int k = 0; k < 3; ++k) {
                if (prev[k] > 0.0) CHECK(c[k] <= 1.1 * prev[k]);
                prev[k] = c[k];
            }
        }
    }

    TEST_CASE("trace_derivatives: zero forcing")
    {
        const Mesh mesh = build_mesh(0.3, 50, 50);
        const ForcingData f = zero_forcing(mesh);
        const auto sol = solve_resolvent(0.3, 4.0, f);
        const auto [d1, d2] = trace_derivatives(sol, assemble_phi(f, 4.0));
        CHECK(d1 == cplx{});
        CHECK(d2 == cplx{});
    }

    TEST_CASE("trace_derivatives: injected lambda1 = 1 at xi = 1/2, mu = pi/2")
    {
        const Mesh mesh = build_mesh(0.5, 16);
        ResolventSolution sol;
        sol.mesh = mesh;
        sol.mu = pi / 2;
        sol.lambda1 = 1.0;
        sol.lambda2 = 0.0;
        const auto [d1, d2] = trace_derivatives(sol, assemble_phi(zero_forcing(mesh), pi / 2));
        CHECK(std::abs(d1 - (pi / 2) * std::cos(pi / 4)) < 1e-15);
        CHECK(d2 == cplx{});
    }

    TEST_CASE("trace_derivatives: one-sided differences converge at second order")
    {
        std::mt19937_64 rng(21);
        const auto F = oracle::AnalyticForcing::random(rng);
        const double mu = 15.0;
        double prev1 = 0.0, prev2 = 0.0;
        for (int n : {200, 400, 800}) {
            const Mesh mesh = build_mesh(golden, n);
            const ForcingData f = F.sample(mesh);
            const auto sol = solve_resolvent(golden, mu, f);
            const auto [d1, d2] = trace_derivatives(sol, assemble_phi(f, mu));
            const auto& a = sol.u1;
            const auto& b = sol.u2;
            const cplx fd1 = (3.0 * a[n] - 4.0 * a[n - 1] + a[n - 2]) / (2.0 * mesh.h_left);
            const cplx fd2 = (-3.0 * b[0] + 4.0 * b[1] - b[2]) / (2.0 * mesh.h_right);
            const double e1 = std::abs(fd1 - d1), e2 = std::abs(fd2 - d2);
            if (prev1 > 0.0) {
                CHECK(std::log2(prev1 / e1) > 1.9);
                CHECK(std::log2(prev2 / e2) > 1.9);
            }
            prev1 = e1;
            prev2 = e2;
        }
    }

    TEST_CASE("interface identity: zero forcing")
    {
        const Mesh mesh = build_mesh(golden, 64);
        const ForcingData f = zero_forcing(mesh);
        const auto sol = solve_resolvent(golden, 20.0, f);
        const auto rep = verify_interface_identity(sol, assemble_phi(f, 20.0), 0.0, 20.0);
        CHECK(rep.identity_residual == 0.0);
        CHECK(rep.bound_holds);
    }

    TEST_CASE("interface identity: random forcing at mu = 20 and refinement")
    {
        std::mt19937_64 rng(4);
        const auto F = oracle::AnalyticForcing::random(rng);
        const double mu = 20.0;
        std::vector<double> rel;
        for (int n : {64, 128, 256, 2048}) {
            const ForcingData f = F.sample(build_mesh(golden, n));
            const auto sol = solve_resolvent(golden, mu, f);
            const auto rep = verify_interface_identity(sol, assemble_phi(f, mu), f.f1.back(), mu);
            rel.push_back(rep.identity_residual / rep.scale);
        }
        CHECK(rel.back() <= 1e-6);
        CHECK(std::log2(rel[0] / rel[1]) >= 2.0);
        CHECK(std::log2(rel[1] / rel[2]) >= 2.0);
    }

    TEST_CASE("interface trace bound with C = 3 over 100 random forcings")
    {
        std::mt19937_64 rng(99);
        double worst = 0.0;
        for (int c = 0; c < 100; ++c) {
            const double mu = 10.0 * (1 + c % 10);
            const auto F = oracle::AnalyticForcing::random(rng);
            const ForcingData f = F.sample(build_mesh(golden, 512));
            const auto sol = solve_resolvent(golden, mu, f);
            const auto rep = verify_interface_identity(sol, assemble_phi(f, mu), f.f1.back(), mu);
            CHECK(rep.bound_holds);
            worst = std::max(worst, rep.bound_ratio);
        }
        MESSAGE("largest bound ratio " << worst);
        CHECK(worst <= 3.0);
    }

    TEST_CASE("resolvent norm: infinite at the exact resonance")
    {
        const Mesh mesh = build_mesh(0.5, 256);
        const auto probes = make_probes(mesh, 2 * pi, 4, 1);
        CHECK(resolvent_norm_lower_bound(0.5, 2 * pi, probes) == std::numeric_limits<double>::infinity());
    }

    TEST_CASE("resolvent norm: finite and monotone under probe inclusion")
    {
        const Mesh mesh = build_mesh(golden, 512);
        const auto probes = make_probes(mesh, 10.0, 50, 17);
        REQUIRE(probes.size() == 50);
        for (const auto& p : probes) CHECK(forcing_norm(p) == doctest::Approx(1.0).epsilon(1e-12));
        double prev = 0.0;
        for (std::size_t k = 1; k <= probes.size(); ++k) {
            const double v = resolvent_norm_lower_bound(golden, 10.0, std::span(probes.data(), k));
            CHECK(std::isfinite(v));
            CHECK(v >= prev);
            prev = v;
        }
    }

    TEST_CASE("resolvent norm: zero probe rejected")
    {
        const std::vector<ForcingData> probes{zero_forcing(build_mesh(golden, 32))};
        CHECK_THROWS_AS(resolvent_norm_lower_bound(golden, 10.0, probes), std::invalid_argument);
    }

    TEST_CASE("resolvent norm grows without bound approaching a real root")
    {
        const Mesh mesh = build_mesh(0.5, 1024);
        double prev = 0.0;
        for (double d : {1e-1, 1e-2, 1e-3, 1e-4}) {
            const double mu = 2 * pi + d;
            const double v = resolvent_norm_lower_bound(0.5, mu, make_probes(mesh, mu, 2, 1));
            CAPTURE(d);
            CHECK(v > 5.0 * prev);
            prev = v;
        }
        CHECK(prev > 1e3);
    }

    TEST_CASE("scan: single frequency degenerates to C = norm, K = 0")
    {
        ScanOptions opt;
        opt.n_per_side = 256;
        const std::vector<double> grid{7.0};
        const auto scan = scan_resolvent_growth(golden, grid, 4, opt);
        REQUIRE(scan.norm_estimate.size() == 1);
        CHECK(scan.C == doctest::Approx(scan.norm_estimate[0]));
        CHECK(scan.K == 0.0);
    }

    TEST_CASE("scan: rational position blows up near 2 pi, golden stays finite")
    {
        ScanOptions opt;
        opt.n_per_side = 512;
        std::vector<double> grid;
        for (int k = 0; k <= 40; ++k) grid.push_back(6.08 + 0.01 * k);
        grid.push_back(2 * pi);
        std::sort(grid.begin(), grid.end());
        const auto rational = scan_resolvent_growth(0.5, grid, 2, opt);
        const double edge = std::max(rational.norm_estimate.front(), rational.norm_estimate.back());
        const double peak = *std::max_element(rational.norm_estimate.begin(), rational.norm_estimate.end());
        CHECK(peak > 100.0 * edge);

        std::vector<double> wide;
        for (double mu = 1.0; mu <= 200.0; mu += 1.0) wide.push_back(mu);
        const auto g = scan_resolvent_growth(golden, wide, 4, opt);
        for (double v : g.norm_estimate) CHECK(std::isfinite(v));
        CHECK(g.fitted_points == wide.size());
        CHECK(g.K >= 0.0);
    }

    TEST_CASE("characteristic function: closed-form values")
    {
        CHECK(std::abs(characteristic_function(0.5, 2 * pi)) < 1e-15);
        CHECK(std::abs(characteristic_function(0.5, pi / 2) - cplx(1.0, 0.5)) < 1e-15);
    }

    TEST_CASE("characteristic function: |D|^2 equals the M-expression on the real axis")
    {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> xi_dist(0.0, 1.0), mu_dist(0.0, 500.0);
        for (int c = 0; c < 2000; ++c) {
            const double xi = xi_dist(rng), mu = mu_dist(rng);
            const double lhs = std::norm(characteristic_function(xi, mu));
            CHECK(std::abs(lhs - diophantine::evaluate_M_expression(xi, mu)) <= 1e-12);
            CHECK(std::abs(lhs - resonance_denominator(xi, mu)) <= 1e-12);
        }
    }

    TEST_CASE("characteristic derivative matches a centred difference")
    {
        for (cplx z : {cplx(1.3, 0.2), cplx(17.0, 1.1), cplx(40.0, -0.5)}) {
            const double h = 1e-5;
            const cplx fd = (characteristic_function(golden, z + h) - characteristic_function(golden, z - h)) / (2 * h);
            CHECK(std::abs(characteristic_derivative(golden, z) - fd) <= 1e-8 * (1 + std::abs(fd)));
        }
    }

    TEST_CASE("roots: xi = 1/2 has a real root at 2 pi")
    {
        const auto search = find_eigenvalues(0.5, Rect{6.0, 6.5, -0.5, 0.5});
        REQUIRE(search.roots.size() == 1);
        CHECK(search.winding_number == 1);
        CHECK(std::abs(search.roots[0].z - 2 * pi) <= 1e-10);
    }

    TEST_CASE("roots: xi = 1/2 closed form 2k pi and (2k+1) pi + i ln 3")
    {
        const auto search = find_eigenvalues(0.5, Rect{1.0, 20.0, -1.0, 5.0});
        std::vector<cplx> expected;
        for (int k = 1; 2 * k * pi < 20.0; ++k) expected.emplace_back(2 * k * pi, 0.0);
        for (int k = 0; (2 * k + 1) * pi < 20.0; ++k) expected.emplace_back((2 * k + 1) * pi, std::log(3.0));
        CHECK(search.roots.size() == expected.size());
        CHECK(search.winding_number == static_cast<int>(expected.size()));
        for (cplx e : expected) {
            double best = 1e300;
            for (const auto& r : search.roots) best = std::min(best, std::abs(r.z - e));
            CAPTURE(e);
            CHECK(best <= 1e-9);
        }
    }

    TEST_CASE("roots: golden position has no real roots and none below the axis")
    {
        const auto search = find_eigenvalues(golden, Rect{0.0, 50.0, 0.0, 5.0});
        CHECK(static_cast<int>(search.roots.size()) == search.winding_number);
        int nonzero = 0;
        for (const auto& r : search.roots) {
            CHECK(r.residual <= 1e-10);
            if (std::abs(r.z) < 1e-6) continue;
            ++nonzero;
            CHECK(r.z.imag() > 1e-8);
        }
        CHECK(nonzero > 10);
    }

    TEST_CASE("roots: dissipativity for random positions")
    {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> xi_dist(0.02, 0.98);
        for (int c = 0; c < 5; ++c) {
            const double xi = xi_dist(rng);
            const auto search = find_eigenvalues(xi, Rect{0.0, 30.0, -1.0, 5.0});
            CAPTURE(xi);
            CHECK(static_cast<int>(search.roots.size()) == search.winding_number);
            for (const auto& r : search.roots) CHECK(r.z.imag() >= -1e-8);
        }
    }

    TEST_CASE("roots: rectangles without roots")
    {
        for (const Rect& rect : {Rect{1.0, 50.0, -1.0, -0.5}, Rect{10.0, 11.0, 20.0, 21.0}}) {
            const auto search = find_eigenvalues(golden, rect);
            CHECK(search.roots.empty());
            CHECK(search.winding_number == 0);
        }
    }

    TEST_CASE("spectral abscissa")
    {
        CHECK(spectral_abscissa(0.5, 10.0) == 0.0);
        const double a = spectral_abscissa(golden, 50.0);
        CHECK(a < 0.0);
        CHECK(std::isfinite(a));
        CHECK(spectral_abscissa(golden, 0.5) == -std::numeric_limits<double>::infinity());
    }
}
