#ifndef PWDAMP_MESH_HPP
#define PWDAMP_MESH_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace pwdamp {

/// Two uniform meshes glued at the actuator: [0,ξ] with n_left intervals and
/// [ξ,1] with n_right intervals. ξ is node n_left and appears exactly once.
struct Mesh {
    double xi = 0.5;
    int n_left = 0;
    int n_right = 0;
    double h_left = 0.0;
    double h_right = 0.0;
    std::vector<double> nodes;

    std::size_t size() const { return nodes.size(); }
    std::size_t interface_index() const { return static_cast<std::size_t>(n_left); }
    double min_spacing() const { return h_left < h_right ? h_left : h_right; }

    /// Nodes of [0,ξ] (n_left + 1 of them, ending at ξ).
    std::span<const double> left_nodes() const { return {nodes.data(), static_cast<std::size_t>(n_left) + 1}; }
    /// Nodes of [ξ,1] (n_right + 1 of them, starting at ξ).
    std::span<const double> right_nodes() const
    {
        return {nodes.data() + n_left, static_cast<std::size_t>(n_right) + 1};
    }
};

/// Throws std::invalid_argument unless 0 < ξ < 1 and both counts are positive.
Mesh build_mesh(double xi, int n_left, int n_right);

/// Mesh with n intervals on each side.
inline Mesh build_mesh(double xi, int n_per_side) { return build_mesh(xi, n_per_side, n_per_side); }

bool same_mesh(const Mesh& a, const Mesh& b);

} // namespace pwdamp

#endif
