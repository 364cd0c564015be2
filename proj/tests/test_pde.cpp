#include "doctest.h"

#include "alcp/pde.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace alcp;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

ProblemData small_problem(Nonlinearity d, double a0_value, std::size_t n = 8, double psi = 0.5, double alpha = 1e-2) {
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(0, 1, 0, 1, n, n));
    auto space = std::make_shared<FemSpace>(mesh);
    const std::size_t dofs = space->n_dof();
    auto y_d = space->interpolate([](const Point& p) { return std::sin(3 * p.x) + p.y * p.y; });
    auto f = space->interpolate([](const Point& p) { return 0.3 * std::cos(2 * p.y) - 0.1; });
    return make_problem_data(space, Field(dofs, a0_value), std::move(d), y_d, f, Field(dofs, psi), Field(dofs, -inf),
                             Field(dofs, inf), alpha);
}

// Root of c + eᶜ = 0 by bisection.
double bisection_root() {
    double lo = -1.0, hi = 0.0;
    for (int k = 0; k < 200; ++k) {
        double mid = 0.5 * (lo + hi);
        (mid + std::exp(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Field random_field(std::size_t n, std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Field f(n);
    for (auto& v : f) v = g(rng);
    return f;
}

}  // namespace

TEST_CASE("nonlinearity derivatives") {
    auto p5 = Nonlinearity::odd_power(5);
    CHECK(p5.d(-2.0) == doctest::Approx(-32.0));
    CHECK(p5.d_y(-2.0) == doctest::Approx(80.0));
    CHECK(p5.d_yy(-2.0) == doctest::Approx(-160.0));
    auto p1 = Nonlinearity::odd_power(1);
    CHECK(p1.d_yy(3.0) == 0.0);
    CHECK_THROWS_AS(Nonlinearity::odd_power(2), std::invalid_argument);
    auto e = Nonlinearity::exponential();
    CHECK(e.d(0.0) == 1.0);
    CHECK(Nonlinearity::zero().d_y(5.0) == 0.0);
}

TEST_CASE("state with exponential nonlinearity hits the scalar root") {
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(0, 1, 0, 1, 10, 10));
    auto space = std::make_shared<FemSpace>(mesh);
    const std::size_t n = space->n_dof();
    auto data = make_problem_data(space, Field(n, 1.0), Nonlinearity::exponential(), Field(n, 0.0), Field(n, 0.0),
                                  Field(n, 1.0), Field(n, -inf), Field(n, inf), 1.0);
    const double root = bisection_root();
    CHECK(root == doctest::Approx(-0.5671432904).epsilon(1e-10));
    auto sol = solve_state(Field(n, 0.0), data);
    for (double v : sol.y) CHECK(std::abs(v - root) <= 1e-8);
    CHECK(sol.iterations <= 10);
}

TEST_CASE("Newton converges superlinearly") {
    auto data = small_problem(Nonlinearity::exponential(), 1.0);
    std::mt19937 rng(11);
    auto u = random_field(data.n_dof(), rng, 2.0);
    NewtonConfig cfg;
    cfg.tol_residual = 1e-13;
    auto sol = solve_state(u, data, cfg);
    const auto& h = sol.residual_history;
    REQUIRE(h.size() >= 4);
    // Once in the asymptotic regime the contraction factor should collapse.
    std::size_t k = h.size() - 2;
    CHECK(h[k] / h[k - 1] < 0.5 * h[k - 1] / h[k - 2] + 1e-3);
    CHECK(norm2(state_residual(sol.y, u, data)) <= 1e-13);
}

TEST_CASE("state without reaction term uses the compatible constant start") {
    auto data = small_problem(Nonlinearity::odd_power(3), 0.0);
    Field u(data.n_dof(), 0.4);
    auto sol = solve_state(u, data);
    CHECK(norm2(state_residual(sol.y, u, data)) <= 1e-12);
    // Pure Neumann, no reaction, linear d ≡ 0: rejected because the Jacobian is singular and the
    // compatibility condition fails in general.
    auto lin = small_problem(Nonlinearity::zero(), 0.0);
    CHECK_THROWS(solve_state(Field(lin.n_dof(), 1.0), lin));
}

TEST_CASE("monotonicity violation is reported") {
    Nonlinearity bad{[](double y) { return -y; }, [](double) { return -1.0; }, [](double) { return 0.0; }};
    auto data = small_problem(bad, 1.0);
    CHECK_THROWS_AS(linearized_operator(Field(data.n_dof(), 0.0), data), ModelViolation);
}

TEST_CASE("first and second derivatives of the control-to-state map") {
    auto data = small_problem(Nonlinearity::odd_power(3), 1.0);
    const std::size_t n = data.n_dof();
    std::mt19937 rng(5);
    auto u = random_field(n, rng);
    auto h = random_field(n, rng);
    auto h2 = random_field(n, rng);
    NewtonConfig tight;
    tight.tol_residual = 1e-14;
    auto y = solve_state(u, data, tight).y;
    auto yh = solve_linearized(y, h, data);

    auto shifted_state = [&](double eps, const Field& dir) {
        Field v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = u[i] + eps * dir[i];
        return solve_state(v, data, tight, y).y;
    };
    std::vector<double> errs;
    for (double eps : {1e-1, 5e-2, 2.5e-2}) {
        auto yp = shifted_state(eps, h);
        Field diff(n);
        for (std::size_t i = 0; i < n; ++i) diff[i] = (yp[i] - y[i]) / eps - yh[i];
        errs.push_back(norm2(diff));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) CHECK(std::log2(errs[i - 1] / errs[i]) >= 0.9);

    // S″ against central differences of S′.
    auto z = apply_second_derivative(y, h, h2, data);
    const double eps = 1e-4;
    auto yp = shifted_state(eps, h2);
    auto ym = shifted_state(-eps, h2);
    auto dp = solve_linearized(yp, h, data);
    auto dm = solve_linearized(ym, h, data);
    Field fd(n);
    for (std::size_t i = 0; i < n; ++i) fd[i] = (dp[i] - dm[i]) / (2 * eps);
    Field gap(n);
    for (std::size_t i = 0; i < n; ++i) gap[i] = fd[i] - z[i];
    CHECK(norm2(gap) <= 1e-5 * norm2(z));

    auto z_swapped = apply_second_derivative(y, h2, h, data);
    for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(z_swapped[i]).epsilon(1e-9));
}

TEST_CASE("adjoint identity") {
    // (M(y − y_d) + Dμ)ᵀ S′h equals the lumped pairing (p, h)_D.
    auto data = small_problem(Nonlinearity::exponential(), 1.0);
    const std::size_t n = data.n_dof();
    std::mt19937 rng(9);
    auto u = random_field(n, rng);
    auto mu = random_field(n, rng);
    for (auto& v : mu) v = std::abs(v);
    auto y = solve_state(u, data).y;
    auto p = solve_adjoint(y, mu, data);
    for (int trial = 0; trial < 5; ++trial) {
        auto h = random_field(n, rng);
        auto yh = solve_linearized(y, h, data);
        Field misfit(n);
        for (std::size_t i = 0; i < n; ++i) misfit[i] = y[i] - data.y_d[i];
        double lhs = data.space->inner_l2(misfit, yh) + data.space->inner_lumped(mu, yh);
        double rhs = data.space->inner_lumped(p, h);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("reduced gradient matches central differences") {
    auto data = small_problem(Nonlinearity::exponential(), 1.0, 8, 0.2);
    const std::size_t n = data.n_dof();
    std::mt19937 rng(21);
    auto u = random_field(n, rng);
    Field mu(n, 0.0);
    for (std::size_t i = 0; i < n; i += 3) mu[i] = 0.5;
    const double rho = 10.0;
    NewtonConfig tight;
    tight.tol_residual = 1e-14;
    auto g = al_reduced_gradient(u, mu, rho, data, tight);
    for (int trial = 0; trial < 5; ++trial) {
        auto h = random_field(n, rng);
        const double eps = 1e-5;
        Field up(n), um(n);
        for (std::size_t i = 0; i < n; ++i) {
            up[i] = u[i] + eps * h[i];
            um[i] = u[i] - eps * h[i];
        }
        double fd = (al_cost(up, mu, rho, data, tight) - al_cost(um, mu, rho, data, tight)) / (2 * eps);
        double an = data.space->inner_lumped(g, h);
        CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
    }
}

TEST_CASE("penalty term closed form") {
    auto data = small_problem(Nonlinearity::zero(), 1.0, 4, 0.0);
    const std::size_t n = data.n_dof();
    const double c = 0.7, rho = 3.0;
    Field y(n, c), mu(n, 0.0);
    CHECK(penalty_term(y, mu, rho, data) == doctest::Approx(rho * c * c * 1.0 / 2.0));
    Field below(n, -c);
    CHECK(penalty_term(below, mu, rho, data) == 0.0);
    auto upd = multiplier_update(Field(n, 0.1), rho, below, data);
    for (double v : upd) CHECK(v == 0.0);
    CHECK_THROWS_AS(multiplier_update(mu, 0.0, y, data), std::invalid_argument);
}

TEST_CASE("tracking cost and projection") {
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(0, 2, 0, 1, 4, 2));
    auto space = std::make_shared<FemSpace>(mesh);
    const std::size_t n = space->n_dof();
    auto data = make_problem_data(space, Field(n, 1.0), Nonlinearity::zero(), Field(n, 1.0), Field(n, 0.0),
                                  Field(n, 1.0), Field(n, -1.0), Field(n, 2.0), 0.5);
    // ½·|Ω|·1 + (α/2)·|Ω|·4
    CHECK(tracking_cost(Field(n, 0.0), Field(n, 2.0), data) == doctest::Approx(0.5 * 2 + 0.25 * 2 * 4));
    auto pr = project_box(Vec{-3.0, 0.5, 7.0, 2.0, -1.0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, data);
    CHECK(pr[0] == -1.0);
    CHECK(pr[1] == 0.5);
    CHECK(pr[2] == 2.0);
    CHECK(data.has_control_bounds());
}

TEST_CASE("problem data validation") {
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(0, 1, 0, 1, 2, 2));
    auto space = std::make_shared<FemSpace>(mesh);
    const std::size_t n = space->n_dof();
    auto make = [&](Field ua, Field ub, double alpha, Field psi) {
        return make_problem_data(space, Field(n, 1.0), Nonlinearity::zero(), Field(n, 0.0), Field(n, 0.0),
                                 std::move(psi), std::move(ua), std::move(ub), alpha);
    };
    CHECK_THROWS_AS(make(Field(n, 1.0), Field(n, 1.0), 1.0, Field(n, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(make(Field(n, -1.0), Field(n, 1.0), 0.0, Field(n, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(make(Field(n, -1.0), Field(n, 1.0), 1.0, Field(n, inf)), std::invalid_argument);
    CHECK_THROWS_AS(make(Field(n - 1, -1.0), Field(n, 1.0), 1.0, Field(n, 0.0)), std::invalid_argument);
    CHECK_FALSE(make(Field(n, -inf), Field(n, inf), 1.0, Field(n, 0.0)).has_control_bounds());
}
