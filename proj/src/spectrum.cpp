#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "pwdamp/errors.hpp"
#include "pwdamp/frequency.hpp"

namespace pwdamp::frequency {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double max_phase_step = 0.5; // radians between accepted samples
constexpr int max_segment_depth = 40;
constexpr double zero_modulus = 1e-12;

double phase_along(double xi, cplx z0, cplx z1, cplx d0, cplx d1, int depth)
{
    const double dphi = std::arg(d1 / d0);
    if (std::abs(dphi) < max_phase_step) return dphi;
    if (depth >= max_segment_depth) throw ContourThroughRoot("contour passes through a zero of D");
    const cplx zm = 0.5 * (z0 + z1);
    const cplx dm = characteristic_function(xi, zm);
    if (std::abs(dm) < zero_modulus) throw ContourThroughRoot("contour passes through a zero of D");
    return phase_along(xi, z0, zm, d0, dm, depth + 1) + phase_along(xi, zm, z1, dm, d1, depth + 1);
}

// Phase increment of D along the straight edge a → b.
double edge_phase(double xi, cplx a, cplx b)
{
    const double len = std::abs(b - a);
    const int pieces = std::max(8, static_cast<int>(std::ceil(8.0 * len)));
    double total = 0.0;
    cplx z_prev = a;
    cplx d_prev = characteristic_function(xi, a);
    if (std::abs(d_prev) < zero_modulus) throw ContourThroughRoot("contour corner is a zero of D");
    for (int k = 1; k <= pieces; ++k) {
        const cplx z = a + (b - a) * (static_cast<double>(k) / pieces);
        const cplx d = characteristic_function(xi, z);
        if (std::abs(d) < zero_modulus) throw ContourThroughRoot("contour passes through a zero of D");
        total += phase_along(xi, z_prev, z, d_prev, d, 0);
        z_prev = z;
        d_prev = d;
    }
    return total;
}

std::array<cplx, 4> corners(const Rect& r)
{
    return {cplx(r.re_min, r.im_min), cplx(r.re_max, r.im_min), cplx(r.re_max, r.im_max), cplx(r.re_min, r.im_max)};
}

// Index of the first edge (bottom, right, top, left) whose phase cannot be
// resolved, or -1 when the winding number was computed into `out`.
int try_winding(double xi, const Rect& r, int& out)
{
    const auto c = corners(r);
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        try {
            total += edge_phase(xi, c[e], c[(e + 1) % 4]);
        } catch (const ContourThroughRoot&) {
            return e;
        }
    }
    out = static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    return -1;
}

struct Newton {
    cplx z;
    double residual;
    bool converged;
};

Newton damped_newton(double xi, cplx z, int multiplicity, const RootOptions& opt)
{
    cplx f = characteristic_function(xi, z);
    for (int it = 0; it < opt.newton_max_iter; ++it) {
        const cplx d = characteristic_derivative(xi, z);
        if (d == cplx{}) break;
        const cplx step = static_cast<double>(multiplicity) * f / d;
        double t = 1.0;
        cplx z_new = z - step;
        cplx f_new = characteristic_function(xi, z_new);
        for (int h = 0; h < 30 && std::abs(f_new) >= std::abs(f); ++h) {
            t *= opt.damping;
            z_new = z - t * step;
            f_new = characteristic_function(xi, z_new);
        }
        if (std::abs(f_new) >= std::abs(f)) {
            // no decrease possible: at the rounding floor
            return {z, std::abs(f), std::abs(f) <= opt.tol};
        }
        const double moved = std::abs(z_new - z);
        z = z_new;
        f = f_new;
        if (std::abs(f) <= opt.tol && moved <= 1e-14 * std::max(1.0, std::abs(z))) return {z, std::abs(f), true};
    }
    return {z, std::abs(f), std::abs(f) <= opt.tol};
}

bool inside(const Rect& r, cplx z)
{
    const double pad = 1e-9 * (1.0 + std::max(r.re_max - r.re_min, r.im_max - r.im_min));
    return z.real() >= r.re_min - pad && z.real() <= r.re_max + pad && z.imag() >= r.im_min - pad &&
           z.imag() <= r.im_max + pad;
}

class RootFinder {
public:
    RootFinder(double xi, const RootOptions& opt) : xi_(xi), opt_(opt) {}

    void search(const Rect& r, int w, std::vector<CharacteristicRoot>& out) const
    {
        if (w == 0) return;
        const cplx center(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max));
        const double size = std::max(r.re_max - r.re_min, r.im_max - r.im_min);

        if (w == 1) {
            const Newton nt = damped_newton(xi_, center, 1, opt_);
            if (nt.converged && inside(r, nt.z)) {
                out.push_back({nt.z, nt.residual, 1});
                return;
            }
        }
        if (size < opt_.min_size) {
            const Newton nt = damped_newton(xi_, center, w, opt_);
            out.push_back({nt.converged ? nt.z : center, std::abs(characteristic_function(xi_, nt.z)), w});
            return;
        }

        static constexpr double fractions[] = {0.5, 0.5371, 0.4529, 0.5913, 0.4087, 0.6449, 0.3551, 0.7013, 0.2987};
        const bool split_re = (r.re_max - r.re_min) >= (r.im_max - r.im_min);
        for (double t : fractions) {
            Rect a = r, b = r;
            if (split_re) {
                const double cut = r.re_min + t * (r.re_max - r.re_min);
                a.re_max = cut;
                b.re_min = cut;
            } else {
                const double cut = r.im_min + t * (r.im_max - r.im_min);
                a.im_max = cut;
                b.im_min = cut;
            }
            int wa = 0, wb = 0;
            if (try_winding(xi_, a, wa) >= 0 || try_winding(xi_, b, wb) >= 0) continue;
            if (wa + wb != w) continue;
            search(a, wa, out);
            search(b, wb, out);
            return;
        }
        throw ContourThroughRoot("could not bisect the search rectangle away from zeros of D");
    }

private:
    double xi_;
    RootOptions opt_;
};

} // namespace

cplx characteristic_function(double xi, cplx z)
{
    return std::sin(z) + I * std::sin(xi * z) * std::sin((1.0 - xi) * z);
}

cplx characteristic_derivative(double xi, cplx z)
{
    const cplx a = xi * z;
    const cplx b = (1.0 - xi) * z;
    return std::cos(z) + I * (xi * std::cos(a) * std::sin(b) + (1.0 - xi) * std::sin(a) * std::cos(b));
}

int winding_number(double xi, const Rect& rect)
{
    int w = 0;
    if (try_winding(xi, rect, w) >= 0) throw ContourThroughRoot("contour passes through a zero of D");
    return w;
}

RootSearch find_eigenvalues(double xi, const Rect& rect, const RootOptions& options)
{
    if (!(rect.re_max > rect.re_min) || !(rect.im_max > rect.im_min))
        throw std::invalid_argument("find_eigenvalues: degenerate rectangle");

    RootSearch result;
    Rect r = rect;
    const double base = 1e-3 * std::max(1.0, std::max(rect.re_max - rect.re_min, rect.im_max - rect.im_min));
    int w = 0;
    int nudges = 0;
    for (int bad = try_winding(xi, r, w); bad >= 0; bad = try_winding(xi, r, w)) {
        if (++nudges > options.max_nudges) throw ContourThroughRoot("boundary nudging failed to avoid zeros of D");
        // Alternate outward/inward with growing amplitude.
        const double delta = base * ((nudges + 1) / 2) * (nudges % 2 == 1 ? 1.0 : -1.0) * 0.7071;
        switch (bad) {
        case 0: r.im_min -= delta; break;
        case 1: r.re_max += delta; break;
        case 2: r.im_max += delta; break;
        default: r.re_min -= delta; break;
        }
    }
    result.contour = r;
    result.winding_number = w;
    if (w < 0) throw ContourThroughRoot("negative winding number: D has no poles, contour is unreliable");

    RootFinder(xi, options).search(r, w, result.roots);
    std::sort(result.roots.begin(), result.roots.end(), [](const CharacteristicRoot& a, const CharacteristicRoot& b) {
        return a.z.real() < b.z.real() || (a.z.real() == b.z.real() && a.z.imag() < b.z.imag());
    });
    return result;
}

double spectral_abscissa(double xi, double R, const RootOptions& options, double im_max)
{
    if (!(R > 0.0)) throw std::invalid_argument("spectral_abscissa: R must be positive");
    const RootSearch found = find_eigenvalues(xi, Rect{0.0, R, -1.0, im_max}, options);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& root : found.roots) {
        if (std::abs(root.z) < 1e-6) continue; // removable zero of D, not an eigenvalue
        if (root.z.real() < 0.0 || root.z.real() > R) continue;
        const double rate = std::abs(root.z.imag()) <= 1e-9 ? 0.0 : -root.z.imag();
        best = std::max(best, rate);
    }
    return best;
}

} // namespace pwdamp::frequency
