#ifndef PWDAMP_NUMERICS_HPP
#define PWDAMP_NUMERICS_HPP

// Uniform-grid quadrature and finite-difference stencils shared by the
// frequency, carleman and simulator modules. Templated on the sample type so
// the same rules serve real and complex grid functions.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pwdamp::numerics {

using cplx = std::complex<double>;

inline double abs2(double x) { return x * x; }
inline double abs2(const cplx& z) { return std::norm(z); }

template <typename T>
T trapezoid(std::span<const T> f, double dx)
{
    const std::size_t n = f.size();
    if (n < 2) return T{};
    T s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < n; ++i) s += f[i];
    return s * dx;
}

/// Composite Simpson. An odd interval count closes with the 3/8 rule on the
/// last three intervals; one interval degrades to the trapezoid rule.
template <typename T>
T simpson(std::span<const T> f, double dx)
{
    const std::size_t n_int = f.size() < 2 ? 0 : f.size() - 1;
    if (n_int == 0) return T{};
    if (n_int == 1) return trapezoid(f, dx);

    std::size_t even_end = n_int;
    T tail{};
    if (n_int % 2 == 1) {
        even_end = n_int - 3;
        tail = (3.0 * dx / 8.0) * (f[even_end] + 3.0 * f[even_end + 1] + 3.0 * f[even_end + 2] + f[even_end + 3]);
    }
    T s{};
    if (even_end > 0) {
        s = f[0] + f[even_end];
        for (std::size_t i = 1; i < even_end; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
        s *= dx / 3.0;
    }
    return s + tail;
}

template <typename T>
T simpson(const std::vector<T>& f, double dx)
{
    return simpson(std::span<const T>(f), dx);
}

/// Running integral F[j] = ∫_{x_0}^{x_j} f, fourth order at every node.
/// Interior intervals integrate the cubic through four neighbouring samples;
/// the first and last intervals use the one-sided cubic.
template <typename T>
std::vector<T> cumulative_integral(std::span<const T> f, double dx)
{
    const std::size_t n = f.size();
    std::vector<T> out(n, T{});
    if (n < 2) return out;
    if (n < 4) {
        for (std::size_t j = 1; j < n; ++j) out[j] = out[j - 1] + 0.5 * dx * (f[j - 1] + f[j]);
        return out;
    }
    const double c = dx / 24.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        T piece;
        if (j == 0) {
            piece = c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
        } else if (j + 2 == n) {
            piece = c * (9.0 * f[j + 1] + 19.0 * f[j] - 5.0 * f[j - 1] + f[j - 2]);
        } else {
            piece = c * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2]);
        }
        out[j + 1] = out[j] + piece;
    }
    return out;
}

/// Second-order first derivative: centred inside, one-sided at both ends.
template <typename T>
std::vector<T> derivative(std::span<const T> f, double dx)
{
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("derivative: need at least 3 samples");
    std::vector<T> d(n);
    const double inv2 = 1.0 / (2.0 * dx);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * inv2;
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2;
    return d;
}

/// Fourth-order first derivative, one-sided five-point stencils near the ends.
template <typename T>
std::vector<T> derivative4(std::span<const T> f, double dx)
{
    const std::size_t n = f.size();
    if (n < 5) return derivative(f, dx);
    std::vector<T> d(n);
    const double c = 1.0 / (12.0 * dx);
    d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for (std::size_t i = 2; i + 2 < n; ++i) d[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    const std::size_t m = n - 1;
    d[m - 1] = -c * (-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]);
    d[m] = -c * (-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]);
    return d;
}

/// Second-order second derivative; one-sided four-point stencils at the ends.
template <typename T>
std::vector<T> second_derivative(std::span<const T> f, double dx)
{
    const std::size_t n = f.size();
    if (n < 4) throw std::invalid_argument("second_derivative: need at least 4 samples");
    std::vector<T> d(n);
    const double inv = 1.0 / (dx * dx);
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
    return d;
}

/// ∫|f|² by composite Simpson.
template <typename T>
double l2_squared(std::span<const T> f, double dx)
{
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = abs2(f[i]);
    return simpson(std::span<const double>(g), dx);
}

} // namespace pwdamp::numerics

#endif
