#pragma once

#include <array>
#include <span>

namespace forchfem {

/// Quadrature node in barycentric coordinates; weights sum to 1 and are
/// multiplied by the element area on use.
struct TriQuadPoint {
    double l0, l1, l2, w;
};

namespace detail {

// Dunavant 6-point rule, exact for polynomials of degree <= 4.
inline constexpr std::array<TriQuadPoint, 6> kDegree4 = {{
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
}};

// Radon 7-point rule, exact for polynomials of degree <= 5.
inline constexpr std::array<TriQuadPoint, 7> kDegree5 = {{
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
    {0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506},
    {0.470142064105115, 0.059715871789770, 0.470142064105115, 0.132394152788506},
    {0.470142064105115, 0.470142064105115, 0.059715871789770, 0.132394152788506},
    {0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827},
    {0.101286507323456, 0.797426985353087, 0.101286507323456, 0.125939180544827},
    {0.101286507323456, 0.101286507323456, 0.797426985353087, 0.125939180544827},
}};

} // namespace detail

inline std::span<const TriQuadPoint> triangle_rule_degree4() { return detail::kDegree4; }
inline std::span<const TriQuadPoint> triangle_rule_degree5() { return detail::kDegree5; }

} // namespace forchfem
