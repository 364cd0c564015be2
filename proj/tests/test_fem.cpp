#include "doctest.h"

#include "alcp/fem.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace alcp;

namespace {

constexpr double pi = std::numbers::pi;

std::shared_ptr<const Mesh> unit_square(std::size_t n) {
    return std::make_shared<Mesh>(generate_rect_mesh(0, 1, 0, 1, n, n));
}

// L² error of the P1 field against an exact function, edge-midpoint rule on
// each of the four congruent subtriangles.
double l2_error(const Mesh& mesh, const Field& uh, const PointFunction& exact) {
    double err2 = 0;
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double area = mesh.triangle_area(t);
        auto eval = [&](double l0, double l1, double l2) {
            const auto& a = mesh.nodes()[tri[0]];
            const auto& b = mesh.nodes()[tri[1]];
            const auto& c = mesh.nodes()[tri[2]];
            Point p{l0 * a.x + l1 * b.x + l2 * c.x, l0 * a.y + l1 * b.y + l2 * c.y};
            double vh = l0 * uh[tri[0]] + l1 * uh[tri[1]] + l2 * uh[tri[2]];
            double d = vh - exact(p);
            return d * d;
        };
        // Edge midpoints of the three corner subtriangles.
        const double q[9][3] = {
            {0.75, 0.25, 0.0}, {0.75, 0.0, 0.25}, {0.5, 0.25, 0.25},
            {0.25, 0.75, 0.0}, {0.0, 0.75, 0.25}, {0.25, 0.5, 0.25},
            {0.25, 0.0, 0.75}, {0.0, 0.25, 0.75}, {0.25, 0.25, 0.5},
        };
        double s = 0;
        for (const auto& w : q) s += eval(w[0], w[1], w[2]);
        // Center subtriangle.
        const double c3[3][3] = {{0.5, 0.25, 0.25}, {0.25, 0.5, 0.25}, {0.25, 0.25, 0.5}};
        for (const auto& w : c3) s += eval(w[0], w[1], w[2]);
        err2 += area / 12.0 * s;
    }
    return std::sqrt(err2);
}

}  // namespace

TEST_CASE("element mass matrix") {
    std::vector<Point> pts{{0, 0}, {1, 0}, {0, 1}};
    Mesh mesh(pts, {{0, 1, 2}});
    auto m = assemble_mass(mesh);
    const double area = 0.5;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(m.at(i, j) == doctest::Approx(area / 12.0 * (i == j ? 2 : 1)));
    auto d = assemble_lumped_mass(mesh);
    for (double v : d) CHECK(v == doctest::Approx(area / 3.0));
}

TEST_CASE("element stiffness on the reference triangle") {
    std::vector<Point> pts{{0, 0}, {1, 0}, {0, 1}};
    Mesh mesh(pts, {{0, 1, 2}});
    auto k = assemble_stiffness(mesh, Vec(3, 0.0));
    const double expected[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(k.at(i, j) == doctest::Approx(expected[i][j]));
    CHECK_THROWS_AS(assemble_stiffness(mesh, Vec{1.0, -1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(assemble_stiffness(mesh, Vec{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("global mass and stiffness identities") {
    auto mesh = std::make_shared<Mesh>(generate_disk_mesh(2.0, 6));
    FemSpace space(mesh);
    const std::size_t n = space.n_dof();
    Vec ones(n, 1.0);
    double total = 0;
    for (double v : space.mass().values) total += v;
    CHECK(total == doctest::Approx(mesh->total_area()).epsilon(1e-13));
    double dsum = 0;
    for (double v : space.lumped()) dsum += v;
    CHECK(dsum == doctest::Approx(mesh->total_area()).epsilon(1e-13));

    auto k0 = assemble_stiffness(*mesh, Vec(n, 0.0));
    CHECK(norm_inf(spmv(k0, ones)) < 1e-12);
    const auto k1 = assemble_stiffness(*mesh, ones);
    CHECK(dot(ones, spmv(k1, ones)) == doctest::Approx(mesh->total_area()).epsilon(1e-13));

    // Symmetry of both matrices.
    for (const auto* a : {&space.mass(), &k1})
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = a->row_offsets[i]; k < a->row_offsets[i + 1]; ++k)
                CHECK(a->values[k] == doctest::Approx(a->at(a->col_indices[k], i)).epsilon(1e-14));
}

TEST_CASE("reaction term uses the edge-midpoint rule") {
    // a₀ linear: the edge-midpoint rule integrates a₀φᵢφⱼ (cubic) inexactly,
    // so compare with the rule applied by hand on one triangle.
    std::vector<Point> pts{{0, 0}, {2, 0}, {0, 1}};
    Mesh mesh(pts, {{0, 1, 2}});
    Vec a0{1.0, 3.0, 5.0};
    auto k = assemble_stiffness(mesh, a0);
    auto g = assemble_stiffness(mesh, Vec(3, 0.0));
    const double area = 1.0;
    const double mids[3][3] = {{0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0;
            for (const auto& l : mids) s += (l[0] * a0[0] + l[1] * a0[1] + l[2] * a0[2]) * l[i] * l[j];
            CHECK(k.at(i, j) - g.at(i, j) == doctest::Approx(area / 3.0 * s));
        }
}

TEST_CASE("Dirichlet integral converges") {
    double prev = 1e300;
    for (std::size_t n : {8u, 16u, 32u}) {
        auto mesh = unit_square(n);
        auto u = interpolate([](const Point& p) { return std::sin(pi * p.x) * std::sin(pi * p.y); }, *mesh);
        auto k = assemble_stiffness(*mesh, Vec(mesh->n_dof(), 0.0));
        double gap = std::abs(dot(u, spmv(k, u)) - pi * pi / 2.0);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("discrete norms") {
    auto space = FemSpace(unit_square(32));
    auto s = space.interpolate([](const Point& p) { return std::sin(pi * p.x); });
    CHECK(space.norm_l2(s) * space.norm_l2(s) == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(space.norm_lumped(s) * space.norm_lumped(s) == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(space.norm_l1(s) == doctest::Approx(2.0 / pi).epsilon(2e-3));
    Vec ones(space.n_dof(), 1.0);
    CHECK(space.norm_l2(ones) == doctest::Approx(1.0));
    CHECK(space.norm_l1(ones) == doctest::Approx(1.0));
    CHECK(FemSpace::norm_cbar(Vec{-3, 2}) == 3.0);

    // L¹ ≤ |Ω|^{1/2} L² in the lumped metric (Cauchy–Schwarz), random fields.
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        Vec f(space.n_dof());
        for (auto& v : f) v = g(rng);
        CHECK(space.norm_l1(f) <= space.norm_lumped(f) * (1 + 1e-12));
        CHECK(space.inner_l2(f, ones) == doctest::Approx(space.inner_lumped(f, ones)));
    }
}

TEST_CASE("positive part and interpolation errors") {
    CHECK(positive_part(Vec{-1, 0, 2}) == Vec{0, 0, 2});
    auto mesh = unit_square(2);
    CHECK_THROWS_AS(interpolate([](const Point&) { return std::nan(""); }, *mesh), std::invalid_argument);
}

TEST_CASE("manufactured solution converges at second order") {
    // −Δy + y = f with y = cos(πx)cos(πy), zero normal derivative.
    auto exact = [](const Point& p) { return std::cos(pi * p.x) * std::cos(pi * p.y); };
    auto rhs = [&](const Point& p) { return (2 * pi * pi + 1) * exact(p); };
    std::vector<double> hs, errs;
    for (std::size_t n : {8u, 16u, 32u}) {
        auto mesh = unit_square(n);
        FemSpace space(mesh);
        auto k = assemble_stiffness(*mesh, Vec(mesh->n_dof(), 1.0));
        auto b = spmv(space.mass(), space.interpolate(rhs));
        SolveConfig cfg;
        cfg.rel_tol = 1e-13;
        auto y = solve(k, b, cfg).x;
        hs.push_back(1.0 / double(n));
        errs.push_back(l2_error(*mesh, y, exact));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        double rate = std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]);
        CHECK(rate > 1.9);
    }
}
