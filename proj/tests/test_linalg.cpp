#include "doctest.h"

#include "alcp/fem.hpp"
#include "alcp/linalg.hpp"

#include <cmath>
#include <random>

using namespace alcp;

namespace {

std::vector<Vec> dense_from_triplets(const std::vector<Triplet>& ts, std::size_t r, std::size_t c) {
    std::vector<Vec> d(r, Vec(c, 0.0));
    for (const auto& t : ts) d[t.row][t.col] += t.value;
    return d;
}

Vec dense_mul(const std::vector<Vec>& a, const Vec& x) {
    Vec y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    return y;
}

// 1D Laplacian plus identity, SPD and diagonally dominant.
SparseMatrix laplace_1d_plus_identity(std::size_t n) {
    std::vector<Triplet> ts;
    for (std::size_t i = 0; i < n; ++i) {
        ts.push_back({i, i, 3.0});
        if (i > 0) ts.push_back({i, i - 1, -1.0});
        if (i + 1 < n) ts.push_back({i, i + 1, -1.0});
    }
    return assemble_from_triplets(ts, n, n);
}

double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("vector helpers") {
    Vec a{3, -4, 0};
    Vec b{1, 2, 5};
    CHECK(dot(a, b) == -5.0);
    CHECK(norm2(a) == 5.0);
    CHECK(norm_inf(a) == 4.0);
    CHECK(norm_inf(Vec{}) == 0.0);
}

TEST_CASE("triplet assembly sums duplicates") {
    std::vector<Triplet> ts{{0, 0, 1.0}, {1, 2, 2.0}, {0, 0, 3.0}, {1, 2, -2.0}, {2, 1, 5.0}};
    auto a = assemble_from_triplets(ts, 3, 3);
    CHECK(a.at(0, 0) == 4.0);
    CHECK(a.at(1, 2) == 0.0);
    CHECK(a.at(2, 1) == 5.0);
    CHECK(a.at(2, 2) == 0.0);
    for (std::size_t r = 0; r < a.n_rows; ++r)
        for (std::size_t k = a.row_offsets[r] + 1; k < a.row_offsets[r + 1]; ++k)
            CHECK(a.col_indices[k - 1] < a.col_indices[k]);
    std::vector<Triplet> bad{{3, 0, 1.0}};
    CHECK_THROWS_AS(assemble_from_triplets(bad, 3, 3), std::invalid_argument);
}

TEST_CASE("random assembly and spmv against dense oracle") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::size_t> idx(0, 19);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<Triplet> ts;
    for (int k = 0; k < 150; ++k) ts.push_back({idx(rng), idx(rng), val(rng)});
    auto a = assemble_from_triplets(ts, 20, 20);
    auto d = dense_from_triplets(ts, 20, 20);
    CHECK(max_abs_diff(a.to_dense()[0], d[0]) < 1e-14);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 20; ++j) CHECK(a.at(i, j) == doctest::Approx(d[i][j]).epsilon(1e-14));

    Vec x(20), y(20);
    for (auto& v : x) v = val(rng);
    for (auto& v : y) v = val(rng);
    CHECK(max_abs_diff(spmv(a, x), dense_mul(d, x)) < 1e-13);

    // Linearity: A(2x − 3y) = 2Ax − 3Ay.
    Vec comb(20);
    for (std::size_t i = 0; i < 20; ++i) comb[i] = 2 * x[i] - 3 * y[i];
    auto lhs = spmv(a, comb);
    auto ax = spmv(a, x), ay = spmv(a, y);
    for (std::size_t i = 0; i < 20; ++i) CHECK(lhs[i] == doctest::Approx(2 * ax[i] - 3 * ay[i]).epsilon(1e-12));

    CHECK_THROWS_AS(spmv(a, Vec(19, 0.0)), std::invalid_argument);
}

TEST_CASE("add, add_diagonal, append_block") {
    auto a = laplace_1d_plus_identity(4);
    std::vector<Triplet> ts{{0, 3, 1.0}};
    auto b = assemble_from_triplets(ts, 4, 4);
    auto c = add(a, b, 2.0, -1.0);
    CHECK(c.at(0, 0) == 6.0);
    CHECK(c.at(0, 3) == -1.0);
    CHECK(c.at(1, 0) == -2.0);

    Vec d{1, 2, 3, 4};
    auto e = add_diagonal(b, d);
    CHECK(e.at(0, 0) == 1.0);
    CHECK(e.at(3, 3) == 4.0);
    CHECK(e.at(0, 3) == 1.0);
    CHECK(e.diagonal() == Vec{1, 2, 3, 4});

    std::vector<Triplet> out;
    append_block(b, 4, 4, -2.0, out);
    auto big = assemble_from_triplets(out, 8, 8);
    CHECK(big.at(4, 7) == -2.0);
    CHECK(big.nnz() == 1);
}

TEST_CASE("CG on a 1D operator matches dense LU") {
    auto a = laplace_1d_plus_identity(10);
    Vec b(10);
    for (std::size_t i = 0; i < 10; ++i) b[i] = std::sin(double(i) + 1.0);
    auto oracle = dense_lu_solve(a.to_dense(), b);
    for (auto pre : {Preconditioner::none, Preconditioner::jacobi}) {
        SolveConfig cfg;
        cfg.preconditioner = pre;
        auto r = solve(a, b, cfg);
        CHECK(max_abs_diff(r.x, oracle) < 1e-9);
        CHECK(r.iterations <= 10);
        CHECK(r.residual <= 1e-10 * norm2(b));
    }
    SolveConfig direct;
    direct.method = SolveMethod::direct;
    CHECK(max_abs_diff(solve(a, b, direct).x, oracle) < 1e-12);
}

TEST_CASE("BiCGStab on a nonsymmetric block system matches dense LU") {
    // Saddle-like 3×3 block structure on a tiny mesh, as in the Newton systems.
    auto mesh = generate_rect_mesh(0, 1, 0, 1, 1, 1);
    FemSpace space(std::make_shared<Mesh>(mesh));
    Vec a0(4, 1.0);
    auto k = assemble_stiffness(mesh, a0);
    const auto& m = space.mass();
    SparseMatrix dmat = add_diagonal(assemble_from_triplets({}, 4, 4), space.lumped());
    std::vector<Triplet> ts;
    append_block(k, 0, 0, 1.0, ts);
    append_block(dmat, 0, 4, -1.0, ts);
    append_block(m, 4, 0, -1.0, ts);
    append_block(k, 4, 8, 1.0, ts);
    append_block(dmat, 8, 4, 1e-2, ts);
    append_block(dmat, 8, 8, 1.0, ts);
    append_block(dmat, 4, 4, 0.5, ts);
    auto g = assemble_from_triplets(ts, 12, 12);
    Vec b(12);
    for (std::size_t i = 0; i < 12; ++i) b[i] = std::cos(0.7 * double(i));
    auto oracle = dense_lu_solve(g.to_dense(), b);

    SolveConfig cfg;
    cfg.method = SolveMethod::bicgstab;
    cfg.preconditioner = Preconditioner::none;
    cfg.rel_tol = 1e-12;
    auto r = solve(g, b, cfg);
    CHECK(max_abs_diff(r.x, oracle) < 1e-8);
    auto res = spmv(g, r.x);
    for (std::size_t i = 0; i < 12; ++i) res[i] -= b[i];
    CHECK(norm2(res) <= 1e-12 * norm2(b) * 1.0001);

    cfg.method = SolveMethod::dense_lu;
    CHECK(max_abs_diff(solve(g, b, cfg).x, oracle) < 1e-13);
    cfg.method = SolveMethod::direct;
    CHECK(max_abs_diff(solve(g, b, cfg).x, oracle) < 1e-10);
}

TEST_CASE("preconditioned CG iteration counts on FEM matrices") {
    auto mesh = generate_rect_mesh(0, 1, 0, 1, 16, 16);
    FemSpace space(std::make_shared<Mesh>(mesh));
    Vec a0(mesh.n_dof(), 1.0);
    const auto kpm = assemble_stiffness(mesh, a0);
    Vec b(mesh.n_dof());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(0.1 * double(i));
    for (const SparseMatrix* a : {&space.mass(), &kpm}) {
        auto r = solve(*a, b);
        CHECK(r.iterations <= 3 * b.size());
        auto res = spmv(*a, r.x);
        for (std::size_t i = 0; i < b.size(); ++i) res[i] -= b[i];
        CHECK(norm2(res) <= 1e-10 * norm2(b) * 1.0001);
    }
}

TEST_CASE("CG reports failure with its best iterate") {
    auto a = laplace_1d_plus_identity(50);
    Vec b(50, 1.0);
    SolveConfig cfg;
    cfg.max_iter = 2;
    cfg.preconditioner = Preconditioner::none;
    try {
        solve(a, b, cfg);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_iterate().size() == 50);
        CHECK(e.iterations() == 2);
        CHECK(e.residual() < norm2(b));
    }
}

TEST_CASE("solver input checks") {
    auto a = laplace_1d_plus_identity(3);
    CHECK_THROWS_AS(solve(a, Vec(4, 1.0)), std::invalid_argument);
    auto big = laplace_1d_plus_identity(201);
    SolveConfig cfg;
    cfg.method = SolveMethod::dense_lu;
    CHECK_THROWS_AS(solve(big, Vec(201, 1.0), cfg), std::invalid_argument);
    std::vector<Vec> singular{{1, 2}, {2, 4}};
    CHECK_THROWS(dense_lu_solve(singular, Vec{1, 1}));
    auto zero = solve(a, Vec(3, 0.0));
    CHECK(norm_inf(zero.x) == 0.0);
}
