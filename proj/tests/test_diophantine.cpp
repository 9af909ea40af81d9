#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pwdamp/diophantine.hpp"

using namespace pwdamp::diophantine;
using std::numbers::pi;

namespace {

std::vector<double> uniform_grid(double lo, double hi, double step)
{
    std::vector<double> g;
    for (int i = 0; lo + i * step <= hi + 1e-9; ++i) g.push_back(lo + i * step);
    return g;
}

// Smallest m in [2, m_max] with m·|||mξ||| < κ, by exact integer arithmetic.
std::int64_t first_identity_violation(double xi, double kappa, std::int64_t m_max)
{
    for (std::int64_t m = 2; m <= m_max; ++m)
        if (static_cast<double>(m) * oracle::exact_distance(m, xi).value() < kappa) return m;
    return -1;
}

} // namespace

TEST_SUITE("diophantine")
{
    TEST_CASE("continued fraction: rationals terminate")
    {
        const auto half = expand_continued_fraction(0.5, 40);
        CHECK(half.terminated);
        CHECK(half.partial_quotients == std::vector<std::int64_t>{0, 2});
        CHECK(half.convergents.back().p == 1);
        CHECK(half.convergents.back().q == 2);

        const auto f = expand_continued_fraction(0.4, 40);
        CHECK(f.terminated);
        CHECK(f.partial_quotients == std::vector<std::int64_t>{0, 2, 2});

        const auto t = expand_continued_fraction(0.75, 40);
        CHECK(t.terminated);
        CHECK(t.partial_quotients == std::vector<std::int64_t>{0, 1, 3});

        const auto s = expand_continued_fraction(355.0 / 1130.0, 40);
        CHECK(s.terminated);
        CHECK(s.convergents.back().q == 226);
    }

    TEST_CASE("continued fraction: golden ratio is all ones until precision runs out")
    {
        const auto cf = expand_continued_fraction(golden_xi, 40);
        CHECK_FALSE(cf.terminated);
        CHECK(cf.depth() >= 25);
        for (std::size_t k = 1; k < cf.partial_quotients.size(); ++k) CHECK(cf.partial_quotients[k] == 1);
        CHECK(cf.max_partial_quotient() == 1);
        // Fibonacci denominators
        for (std::size_t k = 2; k < cf.convergents.size(); ++k)
            CHECK(cf.convergents[k].q == cf.convergents[k - 1].q + cf.convergents[k - 2].q);
    }

    TEST_CASE("continued fraction: recurrence, determinant and alternation on random values")
    {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> U(1e-3, 1.0 - 1e-3);
        for (int c = 0; c < 200; ++c) {
            const double x = U(rng);
            const auto cf = expand_continued_fraction(x, 40);
            const auto& pq = cf.convergents;
            const auto& a = cf.partial_quotients;
            REQUIRE(pq.size() == a.size());
            for (std::size_t k = 1; k < pq.size(); ++k) {
                const std::int64_t p2 = k >= 2 ? pq[k - 2].p : 1, q2 = k >= 2 ? pq[k - 2].q : 0;
                CHECK(pq[k].p == a[k] * pq[k - 1].p + p2);
                CHECK(pq[k].q == a[k] * pq[k - 1].q + q2);
                const __int128 det = static_cast<__int128>(pq[k].p) * pq[k - 1].q - static_cast<__int128>(pq[k - 1].p) * pq[k].q;
                CHECK((det == 1 || det == -1));
                if (k >= 1 && k + 1 < pq.size() && pq[k].q < 1000000) {
                    // x − p_k/q_k alternates in sign: even k below, odd k above
                    const double diff = x - static_cast<double>(pq[k].p) / static_cast<double>(pq[k].q);
                    if (diff != 0.0) CHECK((k % 2 == 0) == (diff > 0.0));
                }
            }
        }
    }

    TEST_CASE("continued fraction: overflow of a quotient means rational")
    {
        const auto cf = expand_continued_fraction(1e-13, 40);
        CHECK(cf.terminated);
    }

    TEST_CASE("distance to the nearest integer")
    {
        CHECK(dist_nearest_integer(0.3) == doctest::Approx(0.3));
        CHECK(dist_nearest_integer(2.7) == doctest::Approx(0.3));
        CHECK(dist_nearest_integer(-1.25) == doctest::Approx(0.25));
        CHECK(dist_nearest_integer(4.0) == 0.0);
        CHECK(dist_nearest_integer(0.5) == 0.5);

        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> U(-50.0, 50.0);
        for (int c = 0; c < 1000; ++c) {
            const double r = U(rng);
            const int m = static_cast<int>(U(rng));
            CHECK(dist_nearest_integer(r) == doctest::Approx(dist_nearest_integer(r + m)).epsilon(1e-12));
            CHECK(dist_nearest_integer(-r) == dist_nearest_integer(r));
            CHECK(dist_nearest_integer(r) >= 0.0);
            CHECK(dist_nearest_integer(r) <= 0.5);
        }
    }

    TEST_CASE("distance |||m xi||| agrees with exact integer arithmetic")
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> U(0.01, 0.99);
        for (int c = 0; c < 50; ++c) {
            const double xi = U(rng);
            for (std::int64_t m : {1LL, 7LL, 1000LL, 123456789LL, 1000000000000LL}) {
                const double exact = oracle::exact_distance(m, xi).value();
                CHECK(std::abs(dist_nearest_integer(m, xi) - exact) <= 1e-15 * std::max(1.0, m * 1e-3));
            }
        }
    }

    TEST_CASE("convergent denominators are best approximations")
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> U(0.01, 0.99);
        for (int c = 0; c < 20; ++c) {
            const double xi = U(rng);
            const auto cf = expand_continued_fraction(xi, 40);
            for (const auto& conv : cf.convergents) {
                if (conv.q > 1000) break;
                const auto best = oracle::exact_distance(conv.q, xi);
                for (std::int64_t m = 1; m < conv.q; ++m) {
                    CAPTURE(xi);
                    CAPTURE(m);
                    CHECK(best < oracle::exact_distance(m, xi));
                }
            }
        }
    }

    TEST_CASE("M-expression: closed-form values and high-precision agreement")
    {
        CHECK(evaluate_M_expression(0.5, 2 * pi) < 1e-30);
        CHECK(evaluate_M_expression(0.5, pi / 2) == doctest::Approx(1.25).epsilon(1e-15));
        const double v = evaluate_M_expression(golden_xi, 100.0);
        CHECK(v > 0.0);
        CHECK(std::abs(v - oracle::m_expression_hp(golden_xi, 100.0)) <= 1e-13);

        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> X(0.0, 1.0), M(0.0, 500.0);
        for (int c = 0; c < 300; ++c) {
            const double xi = X(rng), mu = M(rng);
            CHECK(std::abs(evaluate_M_expression(xi, mu) - oracle::m_expression_hp(xi, mu)) <= 1e-12);
        }
    }

    TEST_CASE("M-expression: range and symmetry")
    {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> X(0.0, 1.0), M(0.0, 1000.0);
        for (int c = 0; c < 5000; ++c) {
            const double xi = X(rng), mu = M(rng);
            const double v = evaluate_M_expression(xi, mu);
            CHECK(v >= 0.0);
            CHECK(v <= 2.0);
            CHECK(std::abs(v - evaluate_M_expression(1.0 - xi, mu)) <= 1e-12);
        }
    }

    TEST_CASE("M-expression vanishes at 2 pi q k for rational p/q")
    {
        for (int q = 2; q <= 12; ++q)
            for (int p = 1; p < q; ++p)
                for (int k = 1; k <= 5; ++k) {
                    const double xi = static_cast<double>(p) / q;
                    CHECK(evaluate_M_expression(xi, 2 * pi * q * k) <= GridCheckSettings{}.zero_floor);
                }
    }

    TEST_CASE("cos variant: closed-form values")
    {
        CHECK(evaluate_cos_expression(2.0 / 3.0, 1.5 * pi) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(evaluate_cos_expression(0.5, pi) == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("M-grid: xi = 1/2 fails at 2 pi for any K1")
    {
        const auto grid = default_mu_grid(1.0, 20.0, 0.01, true);
        for (double K1 : {0.0, 0.5, 1.0, 5.0}) {
            const auto r = check_condition_M_grid(0.5, grid, K1);
            CHECK_FALSE(r.pass);
            REQUIRE(r.witness.has_value());
            CHECK(*r.witness == doctest::Approx(2 * pi).epsilon(1e-15));
            CHECK(r.constants.K2.value() == 0.0);
            CHECK(weighted_expression(r, *r.witness) <= r.violation_threshold);
        }
    }

    TEST_CASE("M-grid: golden passes on [1, 500] step 0.5")
    {
        const auto grid = uniform_grid(1.0, 500.0, 0.5);
        const auto r = check_condition_M_grid(golden_xi, grid, 1.0);
        CHECK(r.pass);
        CHECK(r.constants.K2.value() > 0.0);
        CHECK(r.evidence == "grid-verified");
    }

    TEST_CASE("M-grid: one-point grid")
    {
        const std::vector<double> grid{pi / 2};
        const auto r = check_condition_M_grid(golden_xi, grid, 0.0);
        CHECK(r.pass);
        CHECK(r.constants.K2.value() == doctest::Approx(evaluate_M_expression(golden_xi, pi / 2)));
    }

    TEST_CASE("M-grid: verdict is monotone in K1")
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> X(0.05, 0.95);
        const auto grid = uniform_grid(1.0, 100.0, 0.05);
        for (int c = 0; c < 30; ++c) {
            const double xi = X(rng);
            bool passed = false;
            for (double K1 : {0.0, 0.01, 0.05, 0.1, 0.5, 1.0, 2.0}) {
                const bool p = check_condition_M_grid(xi, grid, K1).pass;
                if (passed) CHECK(p);
                passed = passed || p;
            }
        }
    }

    TEST_CASE("M-grid rejects empty and unsorted grids")
    {
        const std::vector<double> empty, unsorted{2.0, 1.0};
        CHECK_THROWS_AS(check_condition_M_grid(0.3, empty, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(check_condition_M_grid(0.3, unsorted, 1.0), std::invalid_argument);
    }

    TEST_CASE("polynomial condition")
    {
        const auto with_resonance = default_mu_grid(1.0, 20.0, 0.01, true);
        const auto r = check_condition_poly(0.5, 1.0, with_resonance);
        CHECK_FALSE(r.pass);
        CHECK(*r.witness == doctest::Approx(2 * pi));

        const auto grid = uniform_grid(1.0, 500.0, 0.5);
        const auto g1 = check_condition_poly(golden_xi, 1.0, grid);
        CHECK(g1.pass);
        CHECK(g1.constants.K.value() > 0.0);

        const auto g0 = check_condition_poly(golden_xi, 0.0, grid);
        CHECK(g0.constants.K.value() > 0.0);
        MESSAGE("golden, eps = 0: K = " << g0.constants.K.value() << ", pass = " << g0.pass);
    }

    TEST_CASE("cos variant on grids")
    {
        const std::vector<double> grid{1.5 * pi};
        const auto r = check_condition_cos_variant(2.0 / 3.0, grid, 0.0);
        CHECK(r.pass);
        CHECK(r.constants.K2.value() == doctest::Approx(1.0));
        const auto g = check_condition_cos_variant(golden_xi, uniform_grid(1.0, 500.0, 0.5), 1.0);
        MESSAGE("golden cos variant: pass = " << g.pass << ", K2 = " << g.constants.K2.value());
        CHECK(g.constants.K2.value() >= 0.0);
    }

    TEST_CASE("Liouville-type condition")
    {
        const auto half = check_liouville_type(0.5, GrowthFunction::identity(), 0.1, 100);
        CHECK_FALSE(half.pass);
        CHECK(*half.witness == 2.0);

        const auto g = check_liouville_type(golden_xi, GrowthFunction::identity(), 0.2, 10000);
        CHECK(g.pass);
        CHECK(g.constants.kappa.value() > 0.38);
        CHECK(g.constants.kappa.value() < 1.0 / std::sqrt(5.0));

        const double L = liouville_constant(6);
        const auto l = check_liouville_type(L, GrowthFunction::identity(), 0.2, 1000000);
        CHECK_FALSE(l.pass);
        const auto expected = first_identity_violation(L, 0.2, 1000000);
        CHECK(*l.witness == static_cast<double>(expected));
        // the witness is a convergent denominator
        const auto cf = expand_continued_fraction(L, 40);
        bool found = false;
        for (const auto& c : cf.convergents) found = found || c.q == expected;
        CHECK(found);
    }

    TEST_CASE("growth functions")
    {
        const auto pl = GrowthFunction::power_log(1.0, 1.0);
        CHECK(pl(std::exp(1.0)) == doctest::Approx(std::exp(1.0)));
        CHECK(GrowthFunction::exponential(2.0)(1.0) == doctest::Approx(std::exp(2.0)));
        const auto t = GrowthFunction::table({{1.0, 1.0}, {3.0, 5.0}});
        CHECK(t(2.0) == doctest::Approx(3.0));
        CHECK(t(0.0) == 1.0);
        CHECK(t(9.0) == 5.0);
        CHECK_THROWS_AS(GrowthFunction::table({{1.0, 2.0}, {2.0, 1.0}}), std::invalid_argument);
        CHECK_THROWS_AS(GrowthFunction::power_log(0.5, 1.0), std::invalid_argument);
        for (double x = 1.5; x < 100.0; x *= 1.3) CHECK(pl(x * 1.3) >= pl(x));
    }

    TEST_CASE("classification")
    {
        ClassifySettings s;
        s.mu_grid = default_mu_grid(1.0, 100.0, 0.01, true);
        const auto half = classify_actuator(0.5, s);
        CHECK(half.is_rational);
        CHECK_FALSE(half.strongly_stable);
        CHECK_FALSE(half.m_grid.pass);

        const auto three_quarters = classify_actuator(0.75, s);
        CHECK(three_quarters.is_rational);
        CHECK_FALSE(three_quarters.strongly_stable);

        const auto g = classify_actuator(golden_xi, s);
        CHECK_FALSE(g.is_rational);
        CHECK(g.strongly_stable);
        CHECK(g.constant_type);
        CHECK(g.m_grid.pass);

        const auto l = classify_actuator(liouville_constant(6), s);
        CHECK_FALSE(l.constant_type);
    }

    TEST_CASE("default grid samples every multiple of pi/2")
    {
        const auto grid = default_mu_grid(1.0, 50.0, 0.01, true);
        for (int k = 1; k * pi / 2 <= 50.0; ++k) CHECK(std::binary_search(grid.begin(), grid.end(), k * (pi / 2)));
        CHECK(std::is_sorted(grid.begin(), grid.end()));
        CHECK(grid.front() == 1.0);
    }

    TEST_CASE("parse_xi")
    {
        CHECK(parse_xi("0.25") == 0.25);
        CHECK(parse_xi(" 1/3 ") == doctest::Approx(1.0 / 3.0));
        CHECK(parse_xi("golden") == golden_xi);
        CHECK(parse_xi("silver") == doctest::Approx(std::sqrt(2.0) - 1.0));
        CHECK(parse_xi("liouville") == liouville_constant(6));
        CHECK_THROWS_AS(parse_xi("1.5"), std::invalid_argument);
        CHECK_THROWS_AS(parse_xi("0"), std::invalid_argument);
        CHECK_THROWS_AS(parse_xi("1/0"), std::invalid_argument);
        CHECK_THROWS_AS(parse_xi("abc"), std::invalid_argument);
    }
}
