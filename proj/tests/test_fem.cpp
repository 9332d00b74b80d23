#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "forchfem/analysis.hpp"
#include "forchfem/fem.hpp"
#include "forchfem/problems.hpp"
#include "forchfem/solver.hpp"
#include "support.hpp"

using namespace forchfem;

namespace {

GPolynomial two_term() { return GPolynomial({0.0, 1.0}, {1.0, 1.0}); }

ScalarField nodal_interpolant(const Mesh& mesh, double (*f)(Vec2)) {
    ScalarField u;
    u.values.reserve(mesh.vertices.size());
    for (const Vec2& p : mesh.vertices) u.values.push_back(f(p));
    return u;
}

double sum_entries(const CsrMatrix& m) {
    return std::accumulate(m.values.begin(), m.values.end(), 0.0);
}

// plain P1 Laplacian (unit diffusivity)
CsrMatrix laplacian(const Mesh& mesh) {
    CsrMatrix m = vertex_pattern(mesh);
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        const auto& t = mesh.triangles[e];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                m.add(t[a], t[b], geo.area * dot(geo.grad_phi[a], geo.grad_phi[b]));
    }
    return m;
}

double max_abs_diff(const CsrMatrix& a, const CsrMatrix& b, double scale_b = 1.0) {
    REQUIRE(a.values.size() == b.values.size());
    double d = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        d = std::max(d, std::abs(a.values[k] - scale_b * b.values[k]));
    return d;
}

} // namespace

TEST_CASE("element mass matrix closed form") {
    const auto m = element_mass(0.5);   // unit right triangle
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            CHECK_THAT(m[a][b], Catch::Matchers::WithinAbs(a == b ? 1.0 / 12.0 : 1.0 / 24.0, 1e-16));
}

TEST_CASE("global mass matrix") {
    const Mesh mesh = unit_square_mesh(4);
    const CsrMatrix m = assemble_mass(mesh);
    CHECK(m.is_symmetric(0.0));
    CHECK_THAT(sum_entries(m), Catch::Matchers::WithinAbs(1.0, 1e-14));

    // row sums = lumped nodal areas, all nonnegative, summing to the area
    std::vector<double> ones(mesh.vertices.size(), 1.0);
    const std::vector<double> lump = m.multiply(ones);
    double total = 0.0;
    for (double v : lump) {
        CHECK(v >= 0.0);
        total += v;
    }
    CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("stiffness weight reduces to K at frozen gradients") {
    const Mesh mesh = unit_square_mesh(3);
    const GPolynomial g = two_term();
    const CsrMatrix lap = laplacian(mesh);

    ScalarField zero;
    zero.values.assign(mesh.vertices.size(), 0.0);
    const CsrMatrix s0 = assemble_stiffness(mesh, zero, g);
    CHECK(max_abs_diff(s0, lap, kfun(g, 0.0)) < 1e-14);     // K(0) = 1/a_0 = 1

    ScalarField constant;
    constant.values.assign(mesh.vertices.size(), 3.7);
    CHECK(max_abs_diff(assemble_stiffness(mesh, constant, g), s0) < 1e-14);

    // w = x1 interpolant: |grad w| = 1 on every element, S = K(1) L
    const ScalarField x1 = nodal_interpolant(mesh, [](Vec2 p) { return p.x; });
    const CsrMatrix s1 = assemble_stiffness(mesh, x1, g);
    const double k1 = 2.0 / (1.0 + std::sqrt(5.0));
    CHECK(max_abs_diff(s1, lap, k1) < 1e-14);
    CHECK(s1.is_symmetric(0.0));

    ScalarField wrong;
    wrong.values.assign(4, 0.0);
    CHECK_THROWS_AS(assemble_stiffness(mesh, wrong, g), std::invalid_argument);
}

TEST_CASE("nonlinear stiffness equals quadrature assembly") {
    // the integrand is constant per element, so any rule with weights summing
    // to the area gives the same matrix
    const Mesh mesh = unit_square_mesh(4);
    const GPolynomial g = two_term();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ScalarField w;
    for (int v = 0; v < mesh.n_vertices(); ++v) w.values.push_back(uni(rng));

    const CsrMatrix direct = assemble_stiffness(mesh, w, g);
    CsrMatrix quad = vertex_pattern(mesh);
    for (int e = 0; e < mesh.n_triangles(); ++e) {
        const ElementGeometry geo = element_geometry(mesh, e);
        const Vec2 q = element_gradient(mesh, w.values, e);
        const double kw = kfun(g, norm(q));
        const auto& t = mesh.triangles[e];
        for (const TriQuadPoint& qp : triangle_rule_degree5())
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    quad.add(t[a], t[b], qp.w * geo.area * kw * dot(geo.grad_phi[a], geo.grad_phi[b]));
    }
    double rel = 0.0;
    for (std::size_t k = 0; k < direct.values.size(); ++k)
        rel = std::max(rel, std::abs(direct.values[k] - quad.values[k]) /
                                std::max(1.0, std::abs(direct.values[k])));
    CHECK(rel < 1e-14);
}

TEST_CASE("quadrature rules integrate monomials exactly") {
    // reference triangle: integral of x^p y^q = p! q! / (p+q+2)!
    const auto factorial = [](int n) {
        double r = 1.0;
        for (int i = 2; i <= n; ++i) r *= i;
        return r;
    };
    const auto check_rule = [&](std::span<const TriQuadPoint> rule, int degree) {
        for (int p = 0; p + 0 <= degree; ++p)
            for (int q = 0; p + q <= degree; ++q) {
                double integral = 0.0;
                for (const TriQuadPoint& qp : rule)
                    integral += 0.5 * qp.w * std::pow(qp.l1, p) * std::pow(qp.l2, q);
                const double exact = factorial(p) * factorial(q) / factorial(p + q + 2);
                CHECK_THAT(integral, Catch::Matchers::WithinAbs(exact, 1e-15));
            }
    };
    check_rule(triangle_rule_degree4(), 4);
    check_rule(triangle_rule_degree5(), 5);
}

TEST_CASE("load vector") {
    const Mesh mesh = unit_square_mesh(4);

    const std::vector<double> zero = assemble_load(mesh, [](Vec2) { return 0.0; });
    for (double v : zero) CHECK(v == 0.0);

    // f = 1 gives exactly the mass row sums
    const std::vector<double> b1 = assemble_load(mesh, [](Vec2) { return 1.0; });
    std::vector<double> ones(mesh.vertices.size(), 1.0);
    const std::vector<double> lump = assemble_mass(mesh).multiply(ones);
    for (std::size_t i = 0; i < b1.size(); ++i)
        CHECK_THAT(b1[i], Catch::Matchers::WithinAbs(lump[i], 1e-15));

    // f = x1: the rule is exact for linears, so sum b_i = 1/2
    const std::vector<double> bx = assemble_load(mesh, [](Vec2 p) { return p.x; });
    CHECK_THAT(std::accumulate(bx.begin(), bx.end(), 0.0),
               Catch::Matchers::WithinAbs(0.5, 1e-14));
}

TEST_CASE("L2 projection reproduces the finite element space") {
    const Mesh mesh = unit_square_mesh(4);

    const ScalarField c = l2_project(mesh, [](Vec2) { return 2.5; });
    for (double v : c.values) CHECK_THAT(v, Catch::Matchers::WithinAbs(2.5, 1e-11));

    // idempotence: projecting a P1 field returns its coefficients
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ScalarField vh;
    for (int v = 0; v < mesh.n_vertices(); ++v) vh.values.push_back(uni(rng));
    const ScalarField back =
        l2_project(mesh, [&](Vec2 p) { return field_value(mesh, vh, p); });
    for (std::size_t i = 0; i < vh.values.size(); ++i)
        CHECK_THAT(back.values[i], Catch::Matchers::WithinAbs(vh.values[i], 1e-10));
}

TEST_CASE("projection error of a smooth function decays at second order") {
    // dense-quadrature oracle: degree-5 rule on 4 congruent subtriangles
    const auto dense_error = [](const Mesh& mesh, const ScalarField& u, auto&& f) {
        double s = 0.0;
        for (int e = 0; e < mesh.n_triangles(); ++e) {
            const ElementGeometry geo = element_geometry(mesh, e);
            const auto& t = mesh.triangles[e];
            const Vec2 p0 = mesh.vertices[t[0]], p1 = mesh.vertices[t[1]], p2 = mesh.vertices[t[2]];
            const Vec2 m01 = 0.5 * (p0 + p1), m12 = 0.5 * (p1 + p2), m02 = 0.5 * (p0 + p2);
            const Vec2 subs[4][3] = {{p0, m01, m02}, {m01, p1, m12}, {m02, m12, p2}, {m01, m12, m02}};
            const double v0 = u.values[t[0]], v1 = u.values[t[1]], v2 = u.values[t[2]];
            for (const auto& sub : subs)
                for (const TriQuadPoint& qp : triangle_rule_degree5()) {
                    const Vec2 x = qp.l0 * sub[0] + qp.l1 * sub[1] + qp.l2 * sub[2];
                    // barycentric coordinates of x in the parent triangle
                    const double lam1 = dot(geo.grad_phi[1], x - p0);
                    const double lam2 = dot(geo.grad_phi[2], x - p0);
                    const double uh = (1.0 - lam1 - lam2) * v0 + lam1 * v1 + lam2 * v2;
                    const double d = uh - f(x);
                    s += 0.25 * geo.area * qp.w * d * d;
                }
        }
        return std::sqrt(s);
    };

    const auto f = [](Vec2 p) { return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y); };
    std::vector<double> errs;
    for (int n : {4, 8, 16, 32}) {
        const Mesh mesh = unit_square_mesh(n);
        errs.push_back(dense_error(mesh, l2_project(mesh, f), f));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double rate = std::log2(errs[i - 1] / errs[i]);
        CHECK(rate > 1.8);
        CHECK(rate < 2.2);
    }
}

TEST_CASE("Galerkin orthogonality of the projection") {
    const Mesh mesh = unit_square_mesh(4);
    const auto f = [](Vec2 p) { return std::exp(p.x) * (1.0 + p.y * p.y); };
    const ScalarField pi_f = l2_project(mesh, f);
    // (pi f - f, phi_i) = 0 for every basis function
    const std::vector<double> mf = assemble_mass(mesh).multiply(pi_f.values);
    const std::vector<double> bf = assemble_load(mesh, f);
    for (std::size_t i = 0; i < mf.size(); ++i)
        CHECK_THAT(mf[i] - bf[i], Catch::Matchers::WithinAbs(0.0, 1e-10));
}

TEST_CASE("Dirichlet elimination") {
    const Mesh mesh = unit_square_mesh(4);
    const GPolynomial g = two_term();
    ScalarField zero;
    zero.values.assign(mesh.vertices.size(), 0.0);
    const CsrMatrix A = assemble_stiffness(mesh, zero, g);
    const std::vector<double> b(mesh.vertices.size(), 0.0);

    SECTION("zero boundary data gives the zero solution") {
        const BoundaryValues bc = boundary_values(mesh, [](Vec2, double) { return 0.0; }, 0.0);
        const ConstrainedSystem sys = apply_dirichlet(A, b, bc, mesh);
        CHECK(sys.A.rows() == 9);   // (4+1)^2 - 16 boundary
        CHECK(sys.A.is_symmetric(0.0));
        const std::vector<double> x = sys.expand(cg_solve(sys.A, sys.b, 1e-12).x);
        for (double v : x) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-13));
    }

    SECTION("non-boundary vertex rejected") {
        BoundaryValues bc = boundary_values(mesh, [](Vec2, double) { return 0.0; }, 0.0);
        bc.emplace_back(12, 1.0);   // vertex (2,2) is interior on the 4x4 grid
        CHECK_THROWS_AS(apply_dirichlet(A, b, bc, mesh), std::invalid_argument);
    }

    SECTION("incomplete boundary coverage rejected") {
        BoundaryValues bc = boundary_values(mesh, [](Vec2, double) { return 0.0; }, 0.0);
        bc.pop_back();
        CHECK_THROWS_AS(apply_dirichlet(A, b, bc, mesh), std::invalid_argument);
    }

    SECTION("fully constrained n = 1 mesh leaves zero unknowns") {
        const Mesh m1 = unit_square_mesh(1);
        ScalarField z1;
        z1.values.assign(4, 0.0);
        const CsrMatrix A1 = assemble_stiffness(m1, z1, g);
        const std::vector<double> b1(4, 0.0);
        const BoundaryValues bc = boundary_values(m1, [](Vec2 p, double) { return p.x + 2.0 * p.y; }, 0.0);
        const ConstrainedSystem sys = apply_dirichlet(A1, b1, bc, m1);
        CHECK(sys.A.rows() == 0);
        const std::vector<double> x = sys.expand(cg_solve(sys.A, sys.b, 1e-12).x);
        for (int v = 0; v < 4; ++v)
            CHECK_THAT(x[v], Catch::Matchers::WithinAbs(m1.vertices[v].x + 2.0 * m1.vertices[v].y, 1e-15));
    }
}

TEST_CASE("patch test: steady solve reproduces linear data exactly") {
    for (const GPolynomial& g : {GPolynomial({0.0, 1.0}, {1.0, 1.0}),
                                 GPolynomial({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0})}) {
        for (int n : {2, 4, 8}) {
            const Mesh mesh = unit_square_mesh(n);
            const ScalarField u = solve_steady(
                mesh, g, [](Vec2 p, double) { return p.x; }, [](Vec2) { return 0.0; });
            for (int v = 0; v < mesh.n_vertices(); ++v)
                REQUIRE_THAT(u.values[v], Catch::Matchers::WithinAbs(mesh.vertices[v].x, 1e-8));
        }
    }
}

TEST_CASE("discrete residual") {
    const Mesh mesh = unit_square_mesh(4);
    const GPolynomial g = two_term();
    ScalarField zero;
    zero.values.assign(mesh.vertices.size(), 0.0);

    const auto zero_f = [](Vec2, double) { return 0.0; };
    const std::vector<double> r = residual(mesh, g, zero, zero, 0.1, zero_f, 0.0);
    CHECK(r.size() == 9);
    for (double v : r) CHECK(v == 0.0);

    CHECK_THROWS_AS(residual(mesh, g, zero, zero, -0.1, zero_f, 0.0), std::invalid_argument);
}

TEST_CASE("residual of the exact interpolant shrinks under refinement") {
    // consistency of the fully discrete scheme: insert the nodal interpolant
    // of the manufactured solution and refine (h, dt) together
    const Problem p = example1();
    std::vector<double> norms;
    double dt = 1.0 / 16.0;
    for (int n : {4, 8, 16}) {
        const Mesh mesh = unit_square_mesh(n);
        const double t1 = 1.0 + dt;
        ScalarField prev, cur;
        for (const Vec2& x : mesh.vertices) prev.values.push_back(p.exact(x, 1.0));
        for (const Vec2& x : mesh.vertices) cur.values.push_back(p.exact(x, t1));
        const std::vector<double> r = residual(mesh, p.g, prev, cur, dt, p.forcing, t1);
        double rmax = 0.0;
        for (double v : r) rmax = std::max(rmax, std::abs(v));
        norms.push_back(rmax);
        dt /= 4.0;
    }
    // row entries scale with h^2 * truncation, so each (2N, dt/4) refinement
    // must cut the max residual by a solid factor
    CHECK(norms[1] < 0.5 * norms[0]);
    CHECK(norms[2] < 0.5 * norms[1]);
}

TEST_CASE("Newton Jacobian") {
    const Mesh mesh = unit_square_mesh(8);
    const GPolynomial g = two_term();

    SECTION("reduces to the Picard matrix at zero gradient") {
        ScalarField zero;
        zero.values.assign(mesh.vertices.size(), 0.0);
        const CsrMatrix j = assemble_jacobian(mesh, g, zero);
        const CsrMatrix s = assemble_stiffness(mesh, zero, g);
        CHECK(max_abs_diff(j, s) < 1e-15);
    }

    SECTION("matches directional finite differences of the stiffness action") {
        // fields with gradients bounded away from zero keep the flux smooth
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        ScalarField u;
        for (const Vec2& p : mesh.vertices)
            u.values.push_back(2.0 * p.x + 0.5 * p.y * p.y + 0.02 * uni(rng));
        std::vector<double> v;
        for (int i = 0; i < mesh.n_vertices(); ++i) v.push_back(uni(rng));

        const CsrMatrix j = assemble_jacobian(mesh, g, u);
        const std::vector<double> jv = j.multiply(v);

        const double eps = 1e-6;
        ScalarField up = u, um = u;
        for (int i = 0; i < mesh.n_vertices(); ++i) {
            up.values[i] += eps * v[i];
            um.values[i] -= eps * v[i];
        }
        const CsrMatrix sp = assemble_stiffness(mesh, up, g);
        const CsrMatrix sm = assemble_stiffness(mesh, um, g);
        const std::vector<double> fp = sp.multiply(up.values);
        const std::vector<double> fm = sm.multiply(um.values);

        double num = 0.0, den = 0.0;
        for (int i = 0; i < mesh.n_vertices(); ++i) {
            const double fd = (fp[i] - fm[i]) / (2.0 * eps);
            num += (jv[i] - fd) * (jv[i] - fd);
            den += jv[i] * jv[i];
        }
        CHECK(std::sqrt(num / den) < 1e-5);
    }

    SECTION("constrained Jacobian is symmetric positive definite") {
        for (int n : {2, 4}) {
            const Mesh m = unit_square_mesh(n);
            std::mt19937_64 rng(31);
            std::uniform_real_distribution<double> uni(-1.0, 1.0);
            ScalarField w;
            for (int i = 0; i < m.n_vertices(); ++i) w.values.push_back(uni(rng));
            const CsrMatrix j = assemble_jacobian(m, g, w);
            CHECK(j.is_symmetric(1e-14));

            const BoundaryValues bc = boundary_values(m, [](Vec2, double) { return 0.0; }, 0.0);
            const std::vector<double> b(m.vertices.size(), 0.0);
            const ConstrainedSystem sys = apply_dirichlet(j, b, bc, m);
            // dense eigensolve oracle at tiny size
            std::vector<std::vector<double>> dense(sys.A.rows(),
                                                   std::vector<double>(sys.A.rows(), 0.0));
            for (int i = 0; i < sys.A.rows(); ++i)
                for (int k = sys.A.row_ptr[i]; k < sys.A.row_ptr[i + 1]; ++k)
                    dense[i][sys.A.col_idx[k]] = sys.A.values[k];
            const std::vector<double> eig = testsupport::symmetric_eigenvalues(dense);
            REQUIRE(!eig.empty());
            CHECK(eig.front() > 0.0);
        }
    }
}

TEST_CASE("apply_dirichlet preserves symmetry exactly") {
    const Mesh mesh = unit_square_mesh(5);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ScalarField w;
    for (int i = 0; i < mesh.n_vertices(); ++i) w.values.push_back(uni(rng));
    const CsrMatrix s = assemble_stiffness(mesh, w, two_term());
    const std::vector<double> b(mesh.vertices.size(), 0.25);
    const BoundaryValues bc = boundary_values(mesh, [](Vec2 p, double) { return p.x * p.y; }, 0.0);
    const ConstrainedSystem sys = apply_dirichlet(s, b, bc, mesh);
    CHECK(sys.A.is_symmetric(0.0));
}
