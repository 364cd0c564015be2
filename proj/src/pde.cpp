#include "alcp/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alcp {

Nonlinearity Nonlinearity::zero() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

Nonlinearity Nonlinearity::exponential() {
    return {[](double y) { return std::exp(y); }, [](double y) { return std::exp(y); },
            [](double y) { return std::exp(y); }};
}

Nonlinearity Nonlinearity::odd_power(int k) {
    if (k < 1 || k % 2 == 0) throw std::invalid_argument("odd_power: exponent must be odd and positive");
    return {[k](double y) { return std::pow(y, k); },
            [k](double y) { return k * std::pow(y, k - 1); },
            [k](double y) { return k == 1 ? 0.0 : k * (k - 1) * std::pow(y, k - 2); }};
}

bool ProblemData::has_control_bounds() const {
    return std::any_of(u_a.begin(), u_a.end(), [](double v) { return std::isfinite(v); }) ||
           std::any_of(u_b.begin(), u_b.end(), [](double v) { return std::isfinite(v); });
}

ProblemData make_problem_data(std::shared_ptr<const FemSpace> space, Field a0, Nonlinearity nonlinearity,
                              Field y_d, Field f, Field psi, Field u_a, Field u_b, double alpha) {
    const std::size_t n = space->n_dof();
    for (const Field* field : {&a0, &y_d, &f, &psi, &u_a, &u_b}) {
        if (field->size() != n) throw std::invalid_argument("make_problem_data: field size mismatch");
    }
    if (!(alpha > 0.0)) throw std::invalid_argument("make_problem_data: alpha must be positive");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(psi[i]) || !std::isfinite(y_d[i]) || !std::isfinite(f[i])) {
            throw std::invalid_argument("make_problem_data: non-finite data at node " + std::to_string(i));
        }
        if (!(u_a[i] < u_b[i])) throw std::invalid_argument("make_problem_data: require u_a < u_b");
    }
    ProblemData data;
    data.stiffness = assemble_stiffness(space->mesh(), a0);
    data.source = spmv(space->mass(), f);
    data.space = std::move(space);
    data.a0 = std::move(a0);
    data.nonlinearity = std::move(nonlinearity);
    data.y_d = std::move(y_d);
    data.f = std::move(f);
    data.psi = std::move(psi);
    data.u_a = std::move(u_a);
    data.u_b = std::move(u_b);
    data.alpha = alpha;
    return data;
}

Vec solve_spd(const SparseMatrix& a, std::span<const double> b, double rel_tol, double abs_tol) {
    SolveConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    cfg.method = SolveMethod::cg;
    cfg.preconditioner = Preconditioner::jacobi;
    cfg.max_iter = std::max<std::size_t>(200, 2 * a.n_rows);
    try {
        return solve(a, b, cfg).x;
    } catch (const ConvergenceError&) {
        cfg.method = SolveMethod::direct;
        return solve(a, b, cfg).x;
    }
}

Vec state_residual(std::span<const double> y, std::span<const double> u, const ProblemData& data) {
    Vec r = spmv(data.stiffness, y);
    const Vec& d = data.lumped();
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] += d[i] * (data.nonlinearity.d(y[i]) - u[i]) - data.source[i];
    }
    return r;
}

SparseMatrix linearized_operator(std::span<const double> y, const ProblemData& data) {
    Vec diag(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dy = data.nonlinearity.d_y(y[i]);
        if (dy < 0.0) throw ModelViolation("d_y(y) < 0 at node " + std::to_string(i));
        diag[i] = data.lumped()[i] * dy;
    }
    return add_diagonal(data.stiffness, diag);
}

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Constant c with Σ D_i d(c) = Σ (D u + M f)_i; d is nondecreasing.
double compatible_constant(std::span<const double> u, const ProblemData& data) {
    const Vec& d = data.lumped();
    double rhs = 0.0, area = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        rhs += d[i] * u[i] + data.source[i];
        area += d[i];
    }
    const auto g = [&](double c) { return area * data.nonlinearity.d(c) - rhs; };
    double lo = -1.0, hi = 1.0;
    for (int k = 0; k < 64 && !(g(lo) <= 0.0 && g(hi) >= 0.0); ++k) {
        lo *= 2.0;
        hi *= 2.0;
    }
    if (!(g(lo) <= 0.0 && g(hi) >= 0.0)) throw NewtonError("state: no compatible constant start", {});
    for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

StateSolution solve_state(std::span<const double> u, const ProblemData& data, const NewtonConfig& cfg,
                          const std::optional<Field>& initial) {
    const std::size_t n = data.n_dof();
    if (u.size() != n) throw std::invalid_argument("solve_state: control size mismatch");
    if (!(cfg.tol_residual > 0.0)) throw std::invalid_argument("solve_state: tolerance must be positive");

    StateSolution sol;
    sol.y = initial.value_or(Field(n, 0.0));
    if (sol.y.size() != n) throw std::invalid_argument("solve_state: initial guess size mismatch");

    const bool no_reaction = std::all_of(data.a0.begin(), data.a0.end(), [](double a) { return a == 0.0; });
    if (no_reaction &&
        std::all_of(sol.y.begin(), sol.y.end(), [&](double v) { return data.nonlinearity.d_y(v) == 0.0; })) {
        std::fill(sol.y.begin(), sol.y.end(), compatible_constant(u, data));
    }

    Vec r = state_residual(sol.y, u, data);
    double rnorm = norm2(r);
    sol.residual_history.push_back(rnorm);
    for (std::size_t it = 0; it < cfg.max_iter && rnorm > cfg.tol_residual; ++it) {
        const SparseMatrix jac = linearized_operator(sol.y, data);
        const Vec step = solve_spd(jac, r, 1e-10, 0.1 * cfg.tol_residual);
        double t = 1.0;
        Field trial(n);
        Vec trial_r;
        double trial_norm = std::numeric_limits<double>::infinity();
        for (int halving = 0; halving <= 20; ++halving, t *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = sol.y[i] - t * step[i];
            trial_r = state_residual(trial, u, data);
            trial_norm = norm2(trial_r);
            if (!std::isfinite(trial_norm) || !all_finite(trial)) continue;
            if (cfg.damping == Damping::none || trial_norm <= (1.0 - 1e-4 * t) * rnorm) break;
        }
        if (!std::isfinite(trial_norm)) {
            throw NewtonError("state: non-finite residual after backtracking", sol.residual_history);
        }
        sol.y = std::move(trial);
        r = std::move(trial_r);
        rnorm = trial_norm;
        sol.residual_history.push_back(rnorm);
        sol.iterations = it + 1;
    }
    if (!(rnorm <= cfg.tol_residual)) {
        throw NewtonError("state: Newton did not reach tolerance in " + std::to_string(cfg.max_iter) + " iterations",
                          sol.residual_history);
    }
    // Monotonicity check on the final iterate as well.
    for (double v : sol.y) {
        if (data.nonlinearity.d_y(v) < 0.0) throw ModelViolation("d_y(y) < 0 at solution");
    }
    return sol;
}

Field solve_linearized(std::span<const double> y, std::span<const double> h, const ProblemData& data) {
    Vec rhs(h.begin(), h.end());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= data.lumped()[i];
    return solve_spd(linearized_operator(y, data), rhs);
}

Field apply_second_derivative(std::span<const double> y, std::span<const double> h1, std::span<const double> h2,
                              const ProblemData& data) {
    const SparseMatrix op = linearized_operator(y, data);
    const auto linearized = [&](std::span<const double> h) {
        Vec rhs(h.begin(), h.end());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] *= data.lumped()[i];
        return solve_spd(op, rhs);
    };
    const Vec y1 = linearized(h1);
    const Vec y2 = linearized(h2);
    Vec rhs(y.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        rhs[i] = -data.lumped()[i] * data.nonlinearity.d_yy(y[i]) * y1[i] * y2[i];
    }
    if (norm_inf(rhs) == 0.0) return Field(y.size(), 0.0);
    return solve_spd(op, rhs);
}

Field solve_adjoint(std::span<const double> y, std::span<const double> mu, const ProblemData& data) {
    Vec misfit(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) misfit[i] = y[i] - data.y_d[i];
    Vec rhs = spmv(data.mass(), misfit);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += data.lumped()[i] * mu[i];
    if (norm_inf(rhs) == 0.0) return Field(y.size(), 0.0);
    return solve_spd(linearized_operator(y, data), rhs);
}

Field project_box(std::span<const double> v, const ProblemData& data) {
    Field out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i], data.u_a[i], data.u_b[i]);
    return out;
}

Field multiplier_update(std::span<const double> mu, double rho, std::span<const double> y, const ProblemData& data) {
    if (!(rho > 0.0)) throw std::invalid_argument("multiplier_update: rho must be positive");
    Field out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::max(0.0, mu[i] + rho * (y[i] - data.psi[i]));
    return out;
}

double tracking_cost(std::span<const double> y, std::span<const double> u, const ProblemData& data) {
    Vec misfit(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) misfit[i] = y[i] - data.y_d[i];
    return 0.5 * data.space->inner_l2(misfit, misfit) + 0.5 * data.alpha * data.space->inner_lumped(u, u);
}

double penalty_term(std::span<const double> y, std::span<const double> mu, double rho, const ProblemData& data) {
    const Field plus = multiplier_update(mu, rho, y, data);
    return data.space->inner_lumped(plus, plus) / (2.0 * rho);
}

AlEvaluation evaluate_al(std::span<const double> u, std::span<const double> mu, double rho, const ProblemData& data,
                         const NewtonConfig& cfg, const std::optional<Field>& initial) {
    if (!(rho > 0.0)) throw std::invalid_argument("al_cost: rho must be positive");
    AlEvaluation ev;
    ev.y = solve_state(u, data, cfg, initial).y;
    ev.cost = tracking_cost(ev.y, u, data) + penalty_term(ev.y, mu, rho, data);
    return ev;
}

double al_cost(std::span<const double> u, std::span<const double> mu, double rho, const ProblemData& data,
               const NewtonConfig& cfg) {
    return evaluate_al(u, mu, rho, data, cfg).cost;
}

Field al_reduced_gradient(std::span<const double> u, std::span<const double> mu, double rho, const ProblemData& data,
                          const NewtonConfig& cfg) {
    if (!(rho > 0.0)) throw std::invalid_argument("al_reduced_gradient: rho must be positive");
    const Field y = solve_state(u, data, cfg).y;
    const Field mu_bar = multiplier_update(mu, rho, y, data);
    Field g = solve_adjoint(y, mu_bar, data);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += data.alpha * u[i];
    return g;
}

}  // namespace alcp
