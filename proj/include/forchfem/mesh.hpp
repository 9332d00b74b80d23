#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "forchfem/core.hpp"

namespace forchfem {

/// Structured conforming triangulation of the unit square: n x n grid cells,
/// each split along the lower-left to upper-right diagonal into two
/// counter-clockwise triangles. Immutable after construction.
struct Mesh {
    int n = 0;        // subdivisions per side
    double h = 0.0;   // 1/n
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::uint8_t> on_boundary;

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_triangles() const { return static_cast<int>(triangles.size()); }
};

inline Mesh unit_square_mesh(int n) {
    if (n < 1) throw std::domain_error("unit_square_mesh: need n >= 1, got " + std::to_string(n));
    Mesh m;
    m.n = n;
    m.h = 1.0 / n;
    m.vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            m.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

    m.triangles.reserve(2u * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = j * (n + 1) + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + n + 1;
            const int v11 = v01 + 1;
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }
    }

    m.on_boundary.resize(m.vertices.size());
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        const Vec2 p = m.vertices[v];
        const bool b = std::abs(p.x) < 1e-12 || std::abs(p.x - 1.0) < 1e-12 ||
                       std::abs(p.y) < 1e-12 || std::abs(p.y - 1.0) < 1e-12;
        m.on_boundary[v] = b ? 1 : 0;
    }
    return m;
}

/// Per-element geometry for P1 assembly: area and the (constant) gradients of
/// the three barycentric shape functions. Their sum vanishes identically.
struct ElementGeometry {
    double area = 0.0;
    std::array<Vec2, 3> grad_phi;
};

inline ElementGeometry element_geometry(const Mesh& mesh, int e) {
    if (e < 0 || e >= mesh.n_triangles())
        throw std::out_of_range("element_geometry: triangle index " + std::to_string(e));
    const auto& t = mesh.triangles[e];
    const Vec2 p0 = mesh.vertices[t[0]];
    const Vec2 p1 = mesh.vertices[t[1]];
    const Vec2 p2 = mesh.vertices[t[2]];

    const double twice_area = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    if (!(twice_area > 0.0))
        throw std::runtime_error("element_geometry: non-positive area in triangle " + std::to_string(e));

    ElementGeometry g;
    g.area = 0.5 * twice_area;
    g.grad_phi[0] = {(p1.y - p2.y) / twice_area, (p2.x - p1.x) / twice_area};
    g.grad_phi[1] = {(p2.y - p0.y) / twice_area, (p0.x - p2.x) / twice_area};
    g.grad_phi[2] = {(p0.y - p1.y) / twice_area, (p1.x - p0.x) / twice_area};
    return g;
}

/// Text dump, one line per vertex `v x y`, one per triangle `t i j k`.
inline void write_mesh(std::ostream& os, const Mesh& mesh) {
    os.precision(17);
    for (const Vec2& p : mesh.vertices) os << "v " << p.x << ' ' << p.y << '\n';
    for (const auto& t : mesh.triangles) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

} // namespace forchfem
