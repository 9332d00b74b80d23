#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "forchfem/cg.hpp"
#include "forchfem/core.hpp"
#include "forchfem/forchheimer.hpp"
#include "forchfem/mesh.hpp"
#include "forchfem/quadrature.hpp"
#include "forchfem/sparse.hpp"

namespace forchfem {

/// Nodal coefficient vector over the P1 space.
struct ScalarField {
    std::vector<double> values;
    double time = 0.0;
};

inline void check_field(const Mesh& mesh, const ScalarField& f, const char* who) {
    if (static_cast<int>(f.values.size()) != mesh.n_vertices())
        throw std::invalid_argument(std::string(who) + ": field length " +
                                    std::to_string(f.values.size()) + " != vertex count " +
                                    std::to_string(mesh.n_vertices()));
}

/// Exact P1 element mass matrix: area/12 * [[2,1,1],[1,2,1],[1,1,2]].
inline std::array<std::array<double, 3>, 3> element_mass(double area) {
    const double d = area / 6.0, o = area / 12.0;
    return {{{d, o, o}, {o, d, o}, {o, o, d}}};
}

inline Vec2 element_gradient(const Mesh& mesh, std::span<const double> values, int e) {
    const ElementGeometry geo = element_geometry(mesh, e);
    const auto& t = mesh.triangles[e];
    Vec2 g{0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
        g.x += values[static_cast<std::size_t>(t[a])] * geo.grad_phi[a].x;
        g.y += values[static_cast<std::size_t>(t[a])] * geo.grad_phi[a].y;
    }
    return g;
}

inline CsrMatrix assemble_mass(const Mesh& mesh) {
    CsrMatrix m = vertex_pattern(mesh);
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        const auto loc = element_mass(geo.area);
        const auto& t = mesh.triangles[e];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m.add(t[a], t[b], loc[a][b]);
    }
    return m;
}

/// Picard-linearized stiffness S_ij = sum_e K(|grad w|_e) area_e grad(phi_i).grad(phi_j).
/// grad w is constant per element for P1, so the element integral is exact.
inline CsrMatrix assemble_stiffness(const Mesh& mesh, const ScalarField& w, const GPolynomial& g) {
    check_field(mesh, w, "assemble_stiffness");
    CsrMatrix m = vertex_pattern(mesh);
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        const Vec2 q = element_gradient(mesh, w.values, e);
        const double kw = kfun(g, norm(q)) * geo.area;
        const auto& t = mesh.triangles[e];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                m.add(t[a], t[b], kw * dot(geo.grad_phi[a], geo.grad_phi[b]));
    }
    return m;
}

/// Newton linearization: element blocks K(|q|) I + K'(|q|) (q x q)/|q| with
/// q = grad w per element. The rank-one term is dropped where q = 0 (its limit);
/// the block stays positive definite since K(xi) + K'(xi) xi >= (1-a) K(xi) > 0.
inline CsrMatrix assemble_jacobian(const Mesh& mesh, const GPolynomial& g, const ScalarField& w) {
    check_field(mesh, w, "assemble_jacobian");
    CsrMatrix m = vertex_pattern(mesh);
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        const Vec2 q = element_gradient(mesh, w.values, e);
        const double qn = norm(q);
        const double k = kfun(g, qn);
        double rank1 = 0.0;
        if (qn > 0.0) rank1 = kfun_deriv(g, qn) / qn;
        const auto& t = mesh.triangles[e];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double gg = dot(geo.grad_phi[a], geo.grad_phi[b]);
                const double gq = dot(geo.grad_phi[a], q) * dot(geo.grad_phi[b], q);
                m.add(t[a], t[b], geo.area * (k * gg + rank1 * gq));
            }
    }
    return m;
}

/// Load vector b_i = integral of f * phi_i, per-element quadrature (degree-4 default).
template <class F>
std::vector<double> assemble_load(const Mesh& mesh, F&& f,
                                  std::span<const TriQuadPoint> rule = triangle_rule_degree4()) {
    std::vector<double> b(static_cast<std::size_t>(mesh.n_vertices()), 0.0);
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        const auto& t = mesh.triangles[e];
        const Vec2 p0 = mesh.vertices[t[0]];
        const Vec2 p1 = mesh.vertices[t[1]];
        const Vec2 p2 = mesh.vertices[t[2]];
        for (const TriQuadPoint& qp : rule) {
            const Vec2 x = qp.l0 * p0 + qp.l1 * p1 + qp.l2 * p2;
            const double fw = f(x) * qp.w * geo.area;
            b[static_cast<std::size_t>(t[0])] += fw * qp.l0;
            b[static_cast<std::size_t>(t[1])] += fw * qp.l1;
            b[static_cast<std::size_t>(t[2])] += fw * qp.l2;
        }
    }
    return b;
}

/// L2 projection onto the P1 space: solves M pi(w) = (w, phi_i).
template <class F>
ScalarField l2_project(const Mesh& mesh, F&& w, double time_tag = 0.0, double tol = 1e-12) {
    const CsrMatrix m = assemble_mass(mesh);
    const std::vector<double> b = assemble_load(mesh, w);
    ScalarField out;
    out.values = cg_solve(m, b, tol).x;
    out.time = time_tag;
    return out;
}

/// Evaluate a P1 field at an arbitrary point of the unit square (structured
/// point location: grid cell, then the diagonal test).
inline double field_value(const Mesh& mesh, const ScalarField& f, Vec2 p) {
    check_field(mesh, f, "field_value");
    const int n = mesh.n;
    const auto clampi = [n](double c) {
        int i = static_cast<int>(c * n);
        if (i < 0) i = 0;
        if (i > n - 1) i = n - 1;
        return i;
    };
    const int ci = clampi(p.x), cj = clampi(p.y);
    const double lx = p.x * n - ci, ly = p.y * n - cj;
    const int cell = 2 * (cj * n + ci);
    const int e = (lx >= ly) ? cell : cell + 1;   // lower-right vs upper-left of the diagonal
    const auto& t = mesh.triangles[e];
    const ElementGeometry geo = element_geometry(mesh, e);
    // barycentric reconstruction via the shape function gradients
    const Vec2 p0 = mesh.vertices[t[0]];
    double value = 0.0;
    for (int a = 0; a < 3; ++a) {
        double lam = dot(geo.grad_phi[a], p - p0);
        if (a == 0) lam += 1.0;
        value += lam * f.values[static_cast<std::size_t>(t[a])];
    }
    return value;
}

/// Dirichlet data as (vertex, value) pairs covering the mesh boundary.
using BoundaryValues = std::vector<std::pair<int, double>>;

template <class Psi>
BoundaryValues boundary_values(const Mesh& mesh, Psi&& psi, double t) {
    BoundaryValues bv;
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (mesh.on_boundary[static_cast<std::size_t>(v)])
            bv.emplace_back(v, psi(mesh.vertices[static_cast<std::size_t>(v)], t));
    return bv;
}

/// Constrained SPD system after symmetric elimination of Dirichlet vertices.
struct ConstrainedSystem {
    CsrMatrix A;                         // reduced to free vertices
    std::vector<double> b;               // reduced right-hand side
    std::vector<int> free_vertices;      // free index -> mesh vertex
    std::vector<int> reduced_index;      // mesh vertex -> free index, -1 if constrained
    std::vector<double> constrained;     // full-size; boundary value where constrained, 0 elsewhere

    /// Scatter a reduced solution back to a full nodal vector with the
    /// boundary values filled in.
    std::vector<double> expand(std::span<const double> xf) const {
        std::vector<double> full = constrained;
        for (std::size_t k = 0; k < free_vertices.size(); ++k)
            full[static_cast<std::size_t>(free_vertices[k])] = xf[k];
        return full;
    }
};

/// Symmetric elimination: constrained rows/columns leave the unknown set and
/// their column contributions move to the right-hand side. The value set must
/// cover the boundary vertices exactly.
inline ConstrainedSystem apply_dirichlet(const CsrMatrix& A, const std::vector<double>& b,
                                         const BoundaryValues& bc, const Mesh& mesh) {
    const int nv = mesh.n_vertices();
    if (A.rows() != nv || static_cast<int>(b.size()) != nv)
        throw std::invalid_argument("apply_dirichlet: system size does not match mesh");

    ConstrainedSystem sys;
    sys.constrained.assign(static_cast<std::size_t>(nv), 0.0);
    std::vector<std::uint8_t> is_constrained(static_cast<std::size_t>(nv), 0);
    for (const auto& [v, val] : bc) {
        if (v < 0 || v >= nv)
            throw std::invalid_argument("apply_dirichlet: vertex " + std::to_string(v) + " out of range");
        if (!mesh.on_boundary[static_cast<std::size_t>(v)])
            throw std::invalid_argument("apply_dirichlet: vertex " + std::to_string(v) +
                                        " is not on the boundary");
        if (is_constrained[static_cast<std::size_t>(v)])
            throw std::invalid_argument("apply_dirichlet: vertex " + std::to_string(v) +
                                        " constrained twice");
        is_constrained[static_cast<std::size_t>(v)] = 1;
        sys.constrained[static_cast<std::size_t>(v)] = val;
    }
    for (int v = 0; v < nv; ++v)
        if (mesh.on_boundary[static_cast<std::size_t>(v)] && !is_constrained[static_cast<std::size_t>(v)])
            throw std::invalid_argument("apply_dirichlet: boundary vertex " + std::to_string(v) +
                                        " has no value");

    sys.reduced_index.assign(static_cast<std::size_t>(nv), -1);
    for (int v = 0; v < nv; ++v)
        if (!is_constrained[static_cast<std::size_t>(v)]) {
            sys.reduced_index[static_cast<std::size_t>(v)] = static_cast<int>(sys.free_vertices.size());
            sys.free_vertices.push_back(v);
        }

    const int nf = static_cast<int>(sys.free_vertices.size());
    sys.A.n = nf;
    sys.A.row_ptr.assign(static_cast<std::size_t>(nf) + 1, 0);
    sys.b.assign(static_cast<std::size_t>(nf), 0.0);

    for (int fi = 0; fi < nf; ++fi) {
        const int i = sys.free_vertices[static_cast<std::size_t>(fi)];
        double rhs = b[static_cast<std::size_t>(i)];
        int count = 0;
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const int j = A.col_idx[static_cast<std::size_t>(k)];
            if (is_constrained[static_cast<std::size_t>(j)])
                rhs -= A.values[static_cast<std::size_t>(k)] * sys.constrained[static_cast<std::size_t>(j)];
            else
                ++count;
        }
        sys.b[static_cast<std::size_t>(fi)] = rhs;
        sys.A.row_ptr[static_cast<std::size_t>(fi) + 1] = sys.A.row_ptr[static_cast<std::size_t>(fi)] + count;
    }
    sys.A.col_idx.resize(static_cast<std::size_t>(sys.A.row_ptr.back()));
    sys.A.values.resize(sys.A.col_idx.size());
    for (int fi = 0; fi < nf; ++fi) {
        const int i = sys.free_vertices[static_cast<std::size_t>(fi)];
        int out = sys.A.row_ptr[static_cast<std::size_t>(fi)];
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const int j = A.col_idx[static_cast<std::size_t>(k)];
            if (!is_constrained[static_cast<std::size_t>(j)]) {
                sys.A.col_idx[static_cast<std::size_t>(out)] = sys.reduced_index[static_cast<std::size_t>(j)];
                sys.A.values[static_cast<std::size_t>(out)] = A.values[static_cast<std::size_t>(k)];
                ++out;
            }
        }
    }
    return sys;
}

/// Residual of the fully discrete scheme restricted to the interior rows:
/// r = M (cur - prev)/dt + S(cur) cur - b(t_n).
template <class F>
std::vector<double> residual(const Mesh& mesh, const GPolynomial& g, const ScalarField& prev,
                             const ScalarField& cur, double dt, F&& f, double t_n) {
    if (!(dt > 0.0)) throw std::invalid_argument("residual: dt must be positive");
    check_field(mesh, prev, "residual");
    check_field(mesh, cur, "residual");

    const CsrMatrix mass = assemble_mass(mesh);
    const CsrMatrix stiff = assemble_stiffness(mesh, cur, g);
    const std::vector<double> load =
        assemble_load(mesh, [&](Vec2 x) { return f(x, t_n); });

    const int nv = mesh.n_vertices();
    std::vector<double> du(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i)
        du[static_cast<std::size_t>(i)] =
            (cur.values[static_cast<std::size_t>(i)] - prev.values[static_cast<std::size_t>(i)]) / dt;
    const std::vector<double> mdu = mass.multiply(du);
    const std::vector<double> su = stiff.multiply(cur.values);

    std::vector<double> r;
    r.reserve(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i)
        if (!mesh.on_boundary[static_cast<std::size_t>(i)])
            r.push_back(mdu[static_cast<std::size_t>(i)] + su[static_cast<std::size_t>(i)] -
                        load[static_cast<std::size_t>(i)]);
    return r;
}

/// M-weighted norm sqrt(u' M u); mesh-size independent scaling for stopping tests.
inline double mass_norm(const CsrMatrix& mass, std::span<const double> u) {
    std::vector<double> mu(u.size());
    mass.multiply(u, mu);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * mu[i];
    return std::sqrt(std::max(0.0, s));
}

/// ||grad u_h||_{0,beta} = (sum_e area_e |grad u_h|_e^beta)^(1/beta).
inline double grad_norm_lbeta(const Mesh& mesh, const ScalarField& u, double beta) {
    check_field(mesh, u, "grad_norm_lbeta");
    double s = 0.0;
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        s += geo.area * std::pow(norm(element_gradient(mesh, u.values, e)), beta);
    }
    return std::pow(s, 1.0 / beta);
}

} // namespace forchfem
