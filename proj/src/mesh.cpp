#include "pwdamp/mesh.hpp"

#include <stdexcept>
#include <string>

namespace pwdamp {

Mesh build_mesh(double xi, int n_left, int n_right)
{
    if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("build_mesh: xi must lie in (0,1), got " + std::to_string(xi));
    if (n_left < 1 || n_right < 1) throw std::invalid_argument("build_mesh: interval counts must be positive");

    Mesh m;
    m.xi = xi;
    m.n_left = n_left;
    m.n_right = n_right;
    m.h_left = xi / n_left;
    m.h_right = (1.0 - xi) / n_right;
    m.nodes.resize(static_cast<std::size_t>(n_left + n_right) + 1);
    for (int j = 0; j < n_left; ++j) m.nodes[j] = j * m.h_left;
    m.nodes[n_left] = xi;
    for (int j = 1; j < n_right; ++j) m.nodes[n_left + j] = xi + j * m.h_right;
    m.nodes.back() = 1.0;
    return m;
}

bool same_mesh(const Mesh& a, const Mesh& b)
{
    return a.xi == b.xi && a.n_left == b.n_left && a.n_right == b.n_right;
}

} // namespace pwdamp
