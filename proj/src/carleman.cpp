#include "pwdamp/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pwdamp/errors.hpp"
#include "pwdamp/numerics.hpp"

namespace pwdamp::carleman {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double max_exponent = 700.0;

void require_size(const UniformGrid& grid, std::span<const cplx> f, const char* what)
{
    if (f.size() != grid.size()) throw std::invalid_argument(std::string(what) + ": grid function size mismatch");
    if (grid.n < 4) throw std::invalid_argument(std::string(what) + ": need at least 4 intervals");
}

std::vector<std::array<double, 5>> weight_table(const WeightFunction& phi, const UniformGrid& grid)
{
    std::vector<std::array<double, 5>> t(grid.size());
    for (int j = 0; j <= grid.n; ++j) t[static_cast<std::size_t>(j)] = phi.derivatives(grid.x(j));
    return t;
}

double ratio_exp(double d)
{
    if (d > max_exponent) throw Error("conjugation_route: e^(dphi/h) overflows; refine the mesh");
    return std::exp(d);
}

double sup_norm(std::span<const cplx> f)
{
    double m = 0.0;
    for (const auto& z : f) m = std::max(m, std::abs(z));
    return m;
}

// ∫ e^{ψ} g over the grid with ψ and g linear on each cell; exact for that
// interpolant, so large exponential rates are integrated without loss.
double weighted_integral(std::span<const double> psi, std::span<const double> g, double dx)
{
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < g.size(); ++j) {
        const double s = psi[j + 1] - psi[j];
        const double e0 = std::exp(psi[j]);
        const double e1 = std::exp(psi[j + 1]);
        double wa, wb;
        if (std::abs(s) < 0.1) {
            // series of (e^s − 1 − s)/s² and (s e^s − e^s + 1)/s²
            double alpha = 0.0, beta = 0.0, term = 1.0, fact = 2.0;
            for (int k = 0; k < 10; ++k) {
                alpha += term / fact;
                beta += term * (k + 1) / fact;
                term *= s;
                fact *= (k + 3);
            }
            wa = e0 * alpha;
            wb = e0 * beta;
        } else {
            wa = (e1 - e0 * (1.0 + s)) / (s * s);
            wb = (s * e1 - e1 + e0) / (s * s);
        }
        total += dx * (wa * g[j] + wb * g[j + 1]);
    }
    return total;
}

double simpson_real(const std::vector<double>& f, double dx) { return numerics::simpson(f, dx); }

std::vector<cplx> d1(std::span<const cplx> f, double dx) { return numerics::derivative(f, dx); }
std::vector<cplx> d2(std::span<const cplx> f, double dx) { return numerics::second_derivative(f, dx); }

} // namespace

std::vector<double> UniformGrid::nodes() const
{
    std::vector<double> x(size());
    for (int j = 0; j <= n; ++j) x[static_cast<std::size_t>(j)] = this->x(j);
    return x;
}

// ---------------------------------------------------------------------------
// Weights

WeightFunction WeightFunction::shifted_quadratic(double a, double b, double c, double scale)
{
    if (!(b > a)) throw std::invalid_argument("weight: need a < b");
    WeightFunction w;
    w.kind_ = Kind::shifted_quadratic;
    w.a_ = a;
    w.b_ = b;
    w.p_ = {c, scale};
    return w;
}

WeightFunction WeightFunction::exponential(double a, double b, double A, double beta, double shift)
{
    if (!(b > a)) throw std::invalid_argument("weight: need a < b");
    WeightFunction w;
    w.kind_ = Kind::exponential;
    w.a_ = a;
    w.b_ = b;
    w.p_ = {A, beta, shift};
    return w;
}

WeightFunction WeightFunction::polynomial(double a, double b, std::vector<double> coefficients)
{
    if (!(b > a)) throw std::invalid_argument("weight: need a < b");
    if (coefficients.empty()) coefficients.push_back(0.0);
    WeightFunction w;
    w.kind_ = Kind::polynomial;
    w.a_ = a;
    w.b_ = b;
    w.p_ = std::move(coefficients);
    return w;
}

std::array<double, 5> WeightFunction::derivatives(double x) const
{
    switch (kind_) {
    case Kind::shifted_quadratic: {
        const double d = x - p_[0], s = p_[1];
        return {s * d * d, 2.0 * s * d, 2.0 * s, 0.0, 0.0};
    }
    case Kind::exponential: {
        const double A = p_[0], beta = p_[1];
        const double e = A * std::exp(beta * (x - p_[2]));
        return {e, beta * e, beta * beta * e, beta * beta * beta * e, beta * beta * beta * beta * e};
    }
    case Kind::polynomial: {
        std::array<double, 5> out{};
        for (int k = 0; k < 5; ++k) {
            // Horner on the k-th derivative coefficients
            double acc = 0.0;
            for (std::size_t i = p_.size(); i-- > static_cast<std::size_t>(k);) {
                double falling = 1.0;
                for (int r = 0; r < k; ++r) falling *= static_cast<double>(i - static_cast<std::size_t>(r));
                acc = acc * x + falling * p_[i];
            }
            out[static_cast<std::size_t>(k)] = acc;
        }
        return out;
    }
    }
    return {};
}

std::string WeightFunction::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case Kind::shifted_quadratic: os << p_[1] << "*(x-" << p_[0] << ")^2"; break;
    case Kind::exponential: os << p_[0] << "*exp(" << p_[1] << "*(x-" << p_[2] << "))"; break;
    case Kind::polynomial:
        os << "poly[";
        for (std::size_t i = 0; i < p_.size(); ++i) os << (i ? "," : "") << p_[i];
        os << "]";
        break;
    }
    os << " on [" << a_ << "," << b_ << "]";
    return os.str();
}

double WeightFunction::consistency_error(double step) const
{
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double x = a_ + (b_ - a_) * i / 100.0;
        const auto plus = derivatives(x + step);
        const auto minus = derivatives(x - step);
        const auto mid = derivatives(x);
        for (int k = 0; k < 4; ++k) {
            const double fd = (plus[static_cast<std::size_t>(k)] - minus[static_cast<std::size_t>(k)]) / (2.0 * step);
            worst = std::max(worst, std::abs(fd - mid[static_cast<std::size_t>(k) + 1]));
        }
    }
    return worst;
}

std::string to_string(Side side) { return side == Side::left ? "left" : "right"; }

std::vector<WeightViolation> validate_weight(const WeightFunction& phi, Side side, int samples)
{
    samples = std::max(samples, 2);
    WeightViolation gradient{"|phi'| > 0", 0.0, std::numeric_limits<double>::infinity()};
    WeightViolation convexity{"phi'' > 0", 0.0, std::numeric_limits<double>::infinity()};
    for (int i = 0; i < samples; ++i) {
        const double x = phi.a() + (phi.b() - phi.a()) * i / (samples - 1.0);
        const auto d = phi.derivatives(x);
        if (std::abs(d[1]) < gradient.value) gradient = {gradient.condition, x, std::abs(d[1])};
        if (d[2] < convexity.value) convexity = {convexity.condition, x, d[2]};
    }
    std::vector<WeightViolation> out;
    if (!(gradient.value > 0.0)) out.push_back(gradient);
    if (!(convexity.value > 0.0)) out.push_back(convexity);
    if (side == Side::left) {
        const double s = phi.derivative(phi.a(), 1);
        if (!(s > 0.0)) out.push_back({"phi'(a) > 0", phi.a(), s});
    } else {
        const double s = phi.derivative(phi.b(), 1);
        if (!(s < 0.0)) out.push_back({"phi'(b) < 0", phi.b(), s});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Operators

Grid apply_operator_P(std::span<const cplx> u, double dx, double h)
{
    Grid out = d2(u, dx);
    const double k = 1.0 / (h * h);
    for (std::size_t j = 0; j < u.size(); ++j) out[j] += k * u[j];
    return out;
}

Grid apply_conjugated_operator(const WeightFunction& phi, const UniformGrid& grid, double h, std::span<const cplx> w)
{
    require_size(grid, w, "apply_conjugated_operator");
    const auto t = weight_table(phi, grid);
    const Grid dw = d1(w, grid.dx());
    const Grid ddw = d2(w, grid.dx());
    Grid out(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double p1 = t[j][1], p2 = t[j][2];
        out[j] = -h * h * ddw[j] + 2.0 * h * p1 * dw[j] + h * p2 * w[j] - (p1 * p1 + 1.0) * w[j];
    }
    return out;
}

Grid conjugation_route(const WeightFunction& phi, const UniformGrid& grid, double h, std::span<const cplx> w, int sign)
{
    require_size(grid, w, "conjugation_route");
    const double s = sign >= 0 ? 1.0 : -1.0;
    const std::size_t n = w.size();
    std::vector<double> p(n);
    for (int j = 0; j <= grid.n; ++j) p[static_cast<std::size_t>(j)] = s * phi(grid.x(j)) / h;
    const double inv = 1.0 / (grid.dx() * grid.dx());
    const double k = 1.0 / (h * h);
    // e^{p_j} · (e^{−p_m} w_m) for the nodes m in a stencil centred (or anchored) at j
    auto scaled = [&](std::size_t j, std::size_t m) { return ratio_exp(p[j] - p[m]) * w[m]; };

    Grid out(n);
    out[0] = (2.0 * w[0] - 5.0 * scaled(0, 1) + 4.0 * scaled(0, 2) - scaled(0, 3)) * inv + k * w[0];
    for (std::size_t j = 1; j + 1 < n; ++j)
        out[j] = (scaled(j, j + 1) - 2.0 * w[j] + scaled(j, j - 1)) * inv + k * w[j];
    const std::size_t m = n - 1;
    out[m] = (2.0 * w[m] - 5.0 * scaled(m, m - 1) + 4.0 * scaled(m, m - 2) - scaled(m, m - 3)) * inv + k * w[m];
    for (auto& z : out) z *= -h * h;
    return out;
}

QParts decompose_Q(const WeightFunction& phi, const UniformGrid& grid, double h, std::span<const cplx> w)
{
    require_size(grid, w, "decompose_Q");
    const auto t = weight_table(phi, grid);
    const Grid dw = d1(w, grid.dx());
    const Grid ddw = d2(w, grid.dx());
    QParts q{Grid(w.size()), Grid(w.size())};
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double p1 = t[j][1], p2 = t[j][2];
        q.q2[j] = -h * h * ddw[j] - (p1 * p1 + 1.0) * w[j];
        // 2φ'δw − ihφ''w with δ = −ih d/dx
        q.q1[j] = -2.0 * I * h * p1 * dw[j] - I * h * p2 * w[j];
    }
    return q;
}

ConjugationCheck check_conjugation(const WeightFunction& phi, const UniformGrid& grid, double h,
                                   std::span<const cplx> w)
{
    const Grid expanded = apply_conjugated_operator(phi, grid, h, w);
    const Grid plus = conjugation_route(phi, grid, h, w, +1);
    const Grid minus = conjugation_route(phi, grid, h, w, -1);
    const QParts q = decompose_Q(phi, grid, h, w);
    ConjugationCheck c;
    for (std::size_t j = 0; j < w.size(); ++j) {
        c.dual_route = std::max(c.dual_route, std::abs(expanded[j] - plus[j]));
        c.reconstruction = std::max(c.reconstruction, std::abs(q.q2[j] + I * q.q1[j] - plus[j]));
        c.q2 = std::max(c.q2, std::abs(q.q2[j] - 0.5 * (plus[j] + minus[j])));
        c.q1 = std::max(c.q1, std::abs(q.q1[j] - (plus[j] - minus[j]) / (2.0 * I)));
    }
    return c;
}

IntegrationByPartsCheck check_integration_by_parts(const WeightFunction& phi, const UniformGrid& grid, double h,
                                                   std::span<const cplx> v, std::span<const cplx> w)
{
    require_size(grid, v, "check_integration_by_parts");
    require_size(grid, w, "check_integration_by_parts");
    const double dx = grid.dx();
    const QParts qw = decompose_Q(phi, grid, h, w);
    const QParts qv = decompose_Q(phi, grid, h, v);
    const Grid dv = numerics::derivative4(v, dx);
    const Grid dw = numerics::derivative4(w, dx);
    const std::size_t n = v.size(), e = n - 1;

    Grid a2(n), b2(n), a1(n), b1(n);
    for (std::size_t j = 0; j < n; ++j) {
        a2[j] = v[j] * std::conj(qw.q2[j]);
        b2[j] = qv.q2[j] * std::conj(w[j]);
        a1[j] = v[j] * std::conj(qw.q1[j]);
        b1[j] = qv.q1[j] * std::conj(w[j]);
    }
    auto delta = [&](const Grid& d, std::size_t j) { return -I * h * d[j]; };
    const cplx bt2 = I * h *
                     (v[e] * std::conj(delta(dw, e)) + delta(dv, e) * std::conj(w[e]) - v[0] * std::conj(delta(dw, 0)) -
                      delta(dv, 0) * std::conj(w[0]));
    const double pa = phi.derivative(grid.a, 1), pb = phi.derivative(grid.b, 1);
    const cplx bt1 = 2.0 * I * h * (pb * v[e] * std::conj(w[e]) - pa * v[0] * std::conj(w[0]));

    const cplx l2 = numerics::simpson(a2, dx), r2 = numerics::simpson(b2, dx);
    const cplx l1 = numerics::simpson(a1, dx), r1 = numerics::simpson(b1, dx);
    IntegrationByPartsCheck c;
    c.q2_residual = std::abs(l2 - r2 - bt2);
    c.q1_residual = std::abs(l1 - r1 - bt1);
    c.scale = std::max({std::abs(l2), std::abs(r2), std::abs(bt2), std::abs(l1), std::abs(r1), std::abs(bt1)});
    return c;
}

EnergyIdentityReport check_energy_identity(const WeightFunction& phi, const UniformGrid& grid, double h,
                                           std::span<const cplx> w, IdentityReading reading)
{
    require_size(grid, w, "check_energy_identity");
    const double dx = grid.dx();
    const auto t = weight_table(phi, grid);
    const Grid dw = numerics::derivative4(w, dx);
    const Grid ddw = numerics::derivative4(std::span<const cplx>(dw), dx);
    const std::size_t n = w.size();
    const bool corrected = reading == IdentityReading::corrected;

    std::vector<double> lhs_f(n), q2_f(n), t1(n), t2(n), t3(n), t4(n), t5(n), t6(n);
    Grid delta(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double p1 = t[j][1], p2 = t[j][2], p4 = t[j][4];
        delta[j] = -I * h * dw[j];
        const cplx pw = -h * h * ddw[j] + 2.0 * h * p1 * dw[j] + h * p2 * w[j] - (p1 * p1 + 1.0) * w[j];
        const cplx q2 = -h * h * ddw[j] - (p1 * p1 + 1.0) * w[j];
        const double aw = std::norm(w[j]), ad = std::norm(delta[j]);
        lhs_f[j] = std::norm(pw);
        q2_f[j] = std::norm(q2);
        t1[j] = 4.0 * p1 * p1 * ad;
        t2[j] = 4.0 * h * p2 * ad;
        t3[j] = h * h * p2 * p2 * aw;
        t4[j] = 4.0 * h * p2 * (corrected ? p1 * p1 : p1) * aw;
        t5[j] = -h * h * h * p4 * aw;
        t6[j] = 4.0 * h * std::imag(p1 * p2 * w[j] * std::conj(delta[j]));
    }
    std::vector<double> terms = {simpson_real(q2_f, dx), simpson_real(t1, dx), simpson_real(t2, dx),
                                 simpson_real(t3, dx),   simpson_real(t4, dx), simpson_real(t5, dx),
                                 simpson_real(t6, dx)};
    auto boundary = [&](std::size_t j, double sgn) {
        const double p1 = t[j][1], p2 = t[j][2], p3 = t[j][3];
        const double c = corrected ? 2.0 * p2 : 2.0;
        terms.push_back(sgn * 2.0 * h * p1 * std::norm(delta[j]));
        terms.push_back(sgn * c * h * h * std::imag(w[j] * std::conj(delta[j])));
        terms.push_back(sgn * h * (2.0 * p1 * (1.0 + p1 * p1) - h * h * p3) * std::norm(w[j]));
    };
    boundary(n - 1, -1.0);
    boundary(0, 1.0);

    EnergyIdentityReport r;
    r.reading = reading;
    r.lhs = simpson_real(lhs_f, dx);
    r.scale = std::abs(r.lhs);
    for (double v : terms) {
        r.rhs += v;
        r.scale = std::max(r.scale, std::abs(v));
    }
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

// ---------------------------------------------------------------------------
// Inequality

namespace {

std::vector<CarlemanRecord> inequality_records(const WeightFunction& phi, Side side, const UniformGrid& grid,
                                               std::span<const cplx> u, std::span<const double> h_grid)
{
    require_size(grid, u, "evaluate_carleman_inequality");
    const std::size_t n = u.size(), e = n - 1;
    const std::size_t dir = side == Side::left ? 0 : e; // Dirichlet end
    const std::size_t far = side == Side::left ? e : 0;
    const double umax = sup_norm(u);
    if (umax > 0.0 && std::abs(u[dir]) > 1e-12 * umax)
        throw std::invalid_argument("evaluate_carleman_inequality: u must vanish at the Dirichlet end");

    std::vector<CarlemanRecord> out;
    out.reserve(h_grid.size());
    const double dx = grid.dx();
    const Grid du = d1(u, dx);
    std::vector<double> phis(n), psi(n), g0(n), g1(n), gp(n);
    for (int j = 0; j <= grid.n; ++j) phis[static_cast<std::size_t>(j)] = phi(grid.x(j));
    const double pmax = *std::max_element(phis.begin(), phis.end());
    for (std::size_t j = 0; j < n; ++j) {
        g0[j] = std::norm(u[j]);
        g1[j] = std::norm(du[j]);
    }
    for (double h : h_grid) {
        if (!(h > 0.0)) throw std::invalid_argument("evaluate_carleman_inequality: h must be positive");
        const Grid pu = apply_operator_P(u, dx, h);
        for (std::size_t j = 0; j < n; ++j) {
            psi[j] = 2.0 * (phis[j] - pmax) / h;
            gp[j] = std::norm(pu[j]);
        }
        const double h3 = h * h * h;
        CarlemanRecord rec;
        rec.h = h;
        rec.lhs = h * weighted_integral(psi, g0, dx) + h3 * weighted_integral(psi, g1, dx) +
                  h3 * g1[dir] * std::exp(psi[dir]);
        rec.rhs = h * h3 * weighted_integral(psi, gp, dx) + (h * g0[far] + h3 * g1[far]) * std::exp(psi[far]);
        if (rec.rhs > 0.0)
            rec.ratio = rec.lhs / rec.rhs;
        else
            rec.ratio = rec.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        out.push_back(rec);
    }
    return out;
}

// Index of h0_hat in the ascending grid, or -1 when even the smallest h fails.
int threshold_index(std::span<const double> sup_per_h)
{
    double running = 0.0;
    int last_ok = -1;
    for (std::size_t k = 0; k < sup_per_h.size(); ++k) {
        const double r = sup_per_h[k];
        if (!std::isfinite(r)) break;
        if (last_ok >= 0 && running > 0.0 && r > 10.0 * running) break;
        running = std::max(running, r);
        last_ok = static_cast<int>(k);
    }
    return last_ok;
}

} // namespace

CarlemanReport evaluate_carleman_inequality(const WeightFunction& phi, Side side, const UniformGrid& grid,
                                            std::span<const cplx> u, std::span<const double> h_grid)
{
    const Grid sample(u.begin(), u.end());
    const CarlemanEstimate est = estimate_carleman_constant(phi, side, grid, std::span<const Grid>(&sample, 1), h_grid);
    return est.samples.front();
}

std::vector<Grid> random_admissible_samples(Side side, const UniformGrid& grid, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const double len = grid.b - grid.a;
    std::vector<Grid> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    for (int s = 0; s < count; ++s) {
        std::array<double, 6> c{};
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = normal(rng) / (1.0 + static_cast<double>(k));
        Grid u(grid.size());
        for (int j = 0; j <= grid.n; ++j) {
            const double r = side == Side::left ? grid.x(j) - grid.a : grid.b - grid.x(j);
            double sum = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k) sum += c[k] * std::cos(k * std::numbers::pi * r / len);
            u[static_cast<std::size_t>(j)] = r * sum;
        }
        out.push_back(std::move(u));
    }
    return out;
}

CarlemanEstimate estimate_carleman_constant(const WeightFunction& phi, Side side, const UniformGrid& grid,
                                            std::span<const Grid> samples, std::span<const double> h_grid)
{
    CarlemanEstimate est;
    est.h_grid.assign(h_grid.begin(), h_grid.end());
    std::sort(est.h_grid.begin(), est.h_grid.end());
    est.ratio_sup_per_h.assign(est.h_grid.size(), 0.0);

    for (const Grid& u : samples) {
        CarlemanReport r;
        r.side = side;
        r.h_grid = est.h_grid;
        r.records = inequality_records(phi, side, grid, u, est.h_grid);
        for (std::size_t k = 0; k < r.records.size(); ++k) {
            r.ratio_sup = std::max(r.ratio_sup, r.records[k].ratio);
            est.ratio_sup_per_h[k] = std::max(est.ratio_sup_per_h[k], r.records[k].ratio);
        }
        est.samples.push_back(std::move(r));
    }

    const int last = threshold_index(est.ratio_sup_per_h);
    if (last < 0) return est;
    est.h0_hat = est.h_grid[static_cast<std::size_t>(last)];
    for (std::size_t s = 0; s < est.samples.size(); ++s) {
        for (int k = 0; k <= last; ++k) {
            const double r = est.samples[s].records[static_cast<std::size_t>(k)].ratio;
            if (r > est.C_hat) {
                est.C_hat = r;
                est.argmax_sample = static_cast<int>(s);
                est.argmax_h = est.h_grid[static_cast<std::size_t>(k)];
            }
        }
    }
    // Single-sample reports carry their own threshold and constant.
    for (auto& s : est.samples) {
        std::vector<double> ratios;
        for (const auto& rec : s.records) ratios.push_back(rec.ratio);
        const int k = threshold_index(ratios);
        if (k < 0) continue;
        s.h0_hat = s.h_grid[static_cast<std::size_t>(k)];
        s.C_hat = *std::max_element(ratios.begin(), ratios.begin() + k + 1);
    }
    return est;
}

std::vector<double> log_spaced(double lo, double hi, int n)
{
    if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_spaced: bad range");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = std::exp(l0 + (l1 - l0) * k / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

} // namespace pwdamp::carleman
