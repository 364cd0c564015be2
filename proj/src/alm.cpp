#include "alcp/alm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alcp {

void AlConfig::validate() const {
    if (!(rho0 > 0.0)) throw std::invalid_argument("AlConfig: rho0 must be positive");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("AlConfig: tau must lie in (0,1)");
    if (!(theta > 1.0)) throw std::invalid_argument("AlConfig: theta must exceed 1");
    if (!(eps_outer >= 0.0)) throw std::invalid_argument("AlConfig: eps_outer must be nonnegative");
    if (!(R0_plus > 0.0)) throw std::invalid_argument("AlConfig: R0_plus must be positive");
    if (max_outer == 0) throw std::invalid_argument("AlConfig: max_outer must be >= 1");
    if (!(inner.tol > 0.0)) throw std::invalid_argument("SsnConfig: tol must be positive");
    if (inner.max_iter == 0) throw std::invalid_argument("SsnConfig: max_iter must be >= 1");
}

std::vector<std::size_t> ActiveSets::indices(const std::vector<std::uint8_t>& mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out.push_back(i);
    }
    return out;
}

ActiveSets compute_active_sets(std::span<const double> y, std::span<const double> p, std::span<const double> mu,
                               double rho, const ProblemData& data) {
    if (!(rho > 0.0)) throw std::invalid_argument("compute_active_sets: rho must be positive");
    const std::size_t n = y.size();
    ActiveSets sets{std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0)};
    for (std::size_t i = 0; i < n; ++i) {
        const double unconstrained = -p[i] / data.alpha;
        sets.lower[i] = unconstrained <= data.u_a[i];
        sets.upper[i] = unconstrained >= data.u_b[i];
        sets.penalty[i] = mu[i] + rho * (y[i] - data.psi[i]) > 0.0;
    }
    return sets;
}

namespace {

double inactive(const ActiveSets& s, std::size_t i) { return (s.lower[i] || s.upper[i]) ? 0.0 : 1.0; }

struct Residuals {
    Vec state;
    Vec adjoint;
    Vec control;  // nodal, unscaled
};

Residuals kkt_residual(const KktState& x, std::span<const double> mu, double rho, const ActiveSets& sets,
                       const ProblemData& data) {
    const std::size_t n = data.n_dof();
    const Vec& d = data.lumped();
    Residuals r;
    r.state = state_residual(x.y, x.u, data);

    r.adjoint = spmv(data.stiffness, x.p);
    Vec misfit(n);
    for (std::size_t i = 0; i < n; ++i) misfit[i] = x.y[i] - data.y_d[i];
    const Vec m_misfit = spmv(data.mass(), misfit);
    for (std::size_t i = 0; i < n; ++i) {
        const double penalty = sets.penalty[i] ? mu[i] + rho * (x.y[i] - data.psi[i]) : 0.0;
        r.adjoint[i] += d[i] * data.nonlinearity.d_y(x.y[i]) * x.p[i] - m_misfit[i] - d[i] * penalty;
    }

    r.control.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double bound = 0.0;
        if (sets.lower[i]) bound = data.u_a[i];
        if (sets.upper[i]) bound = data.u_b[i];
        r.control[i] = x.u[i] + inactive(sets, i) * x.p[i] / data.alpha - bound;
    }
    return r;
}

double stacked_norm(const Residuals& r, const Vec& d) {
    double s = dot(r.state, r.state) + dot(r.adjoint, r.adjoint);
    for (std::size_t i = 0; i < d.size(); ++i) s += (d[i] * r.control[i]) * (d[i] * r.control[i]);
    return std::sqrt(s);
}

// (−M − ρ D χ_Y + D d_yy(y) p), the y-column of the adjoint row.
SparseMatrix adjoint_y_block(const KktState& x, double rho, const ActiveSets& sets, const ProblemData& data) {
    Vec diag(data.n_dof());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        diag[i] = data.lumped()[i] * (data.nonlinearity.d_yy(x.y[i]) * x.p[i] - (sets.penalty[i] ? rho : 0.0));
    }
    SparseMatrix neg_mass = data.mass();
    for (double& v : neg_mass.values) v = -v;
    return add_diagonal(neg_mass, diag);
}

}  // namespace

SsnSystem assemble_ssn_system(const KktState& state, std::span<const double> mu, double rho, const ActiveSets& sets,
                              const ProblemData& data) {
    const std::size_t n = data.n_dof();
    const Vec& d = data.lumped();
    const SparseMatrix a = linearized_operator(state.y, data);
    std::vector<Triplet> t;
    append_block(a, 0, 0, 1.0, t);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, n + i, -d[i]});
    append_block(adjoint_y_block(state, rho, sets, data), n, 0, 1.0, t);
    append_block(a, n, 2 * n, 1.0, t);
    for (std::size_t i = 0; i < n; ++i) {
        t.push_back({2 * n + i, n + i, d[i]});
        const double w = inactive(sets, i) * d[i] / data.alpha;
        if (w != 0.0) t.push_back({2 * n + i, 2 * n + i, w});
    }
    SsnSystem sys;
    sys.matrix = assemble_from_triplets(t, 3 * n, 3 * n);
    const Residuals r = kkt_residual(state, mu, rho, sets, data);
    sys.residual.reserve(3 * n);
    sys.residual.insert(sys.residual.end(), r.state.begin(), r.state.end());
    sys.residual.insert(sys.residual.end(), r.adjoint.begin(), r.adjoint.end());
    for (std::size_t i = 0; i < n; ++i) sys.residual.push_back(d[i] * r.control[i]);
    return sys;
}

namespace {

SsnStep ssn_step_with_sets(const KktState& x, std::span<const double> mu, double rho, const ActiveSets& sets,
                           const ProblemData& data, const SsnConfig& ssn) {
    const std::size_t n = data.n_dof();
    const Vec& d = data.lumped();
    const Residuals r = kkt_residual(x, mu, rho, sets, data);

    // δu = −F₃ − (1/α)(1−χ_A)δp, substituted into the state row.
    const SparseMatrix a = linearized_operator(x.y, data);
    std::vector<Triplet> t;
    append_block(a, 0, 0, 1.0, t);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = inactive(sets, i) * d[i] / data.alpha;
        if (w != 0.0) t.push_back({i, n + i, w});
    }
    append_block(adjoint_y_block(x, rho, sets, data), n, 0, 1.0, t);
    append_block(a, n, n, 1.0, t);
    const SparseMatrix reduced = assemble_from_triplets(t, 2 * n, 2 * n);

    Vec rhs(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = -r.state[i] - d[i] * r.control[i];
        rhs[n + i] = -r.adjoint[i];
    }
    SolveConfig cfg;
    cfg.method = SolveMethod::direct;
    cfg.rel_tol = ssn.linear_rel_tol;
    cfg.abs_tol = 1e-300;
    SolveResult sol;
    try {
        sol = solve(reduced, rhs, cfg);
    } catch (const ConvergenceError& e) {
        // Accept a slightly larger residual from the factorization before failing.
        if (!(e.residual() <= 1e4 * ssn.linear_rel_tol * norm2(rhs))) throw;
        sol.x = e.best_iterate();
    }

    SsnStep step;
    step.dy.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
    step.dp.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(n), sol.x.end());
    step.du.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        step.du[i] = -r.control[i] - inactive(sets, i) * step.dp[i] / data.alpha;
    }
    step.residual_norm = stacked_norm(r, d);
    return step;
}

}  // namespace

SsnStep ssn_step(const KktState& state, std::span<const double> mu, double rho, const ProblemData& data,
                 const SsnConfig& cfg) {
    const ActiveSets sets = compute_active_sets(state.y, state.p, mu, rho, data);
    return ssn_step_with_sets(state, mu, rho, sets, data, cfg);
}

SubproblemResult solve_subproblem(std::span<const double> mu, double rho, const KktState& init,
                                  const ProblemData& data, const SsnConfig& cfg) {
    if (!(rho > 0.0)) throw std::invalid_argument("solve_subproblem: rho must be positive");
    const std::size_t n = data.n_dof();
    if (mu.size() != n || init.y.size() != n || init.u.size() != n || init.p.size() != n) {
        throw std::invalid_argument("solve_subproblem: dimension mismatch");
    }
    const auto& space = *data.space;
    const auto& nl = data.nonlinearity;

    SubproblemResult result;
    result.state = init;
    ActiveSets sets = compute_active_sets(init.y, init.p, mu, rho, data);
    Vec work(n);
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        const SsnStep step = ssn_step_with_sets(result.state, mu, rho, sets, data, cfg);
        const KktState& old = result.state;
        KktState next = old;
        for (std::size_t i = 0; i < n; ++i) {
            next.y[i] += step.dy[i];
            next.u[i] += step.du[i];
            next.p[i] += step.dp[i];
        }
        const ActiveSets next_sets = compute_active_sets(next.y, next.p, mu, rho, data);

        SsnTraceEntry entry;
        entry.residual_norm = step.residual_norm;
        for (std::size_t i = 0; i < n; ++i) {
            entry.changed_nodes += (sets.lower[i] != next_sets.lower[i]) + (sets.upper[i] != next_sets.upper[i]) +
                                   (sets.penalty[i] != next_sets.penalty[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double dy = next.y[i] - old.y[i];
            work[i] = nl.d(next.y[i]) - (nl.d_y(old.y[i]) * dy + nl.d(old.y[i]));
        }
        entry.r1 = space.norm_l2(work);
        for (std::size_t i = 0; i < n; ++i) {
            const double dy = next.y[i] - old.y[i];
            const double switched = double(next_sets.penalty[i]) - double(sets.penalty[i]);
            work[i] = nl.d_y(next.y[i]) * next.p[i] - nl.d_y(old.y[i]) * next.p[i] -
                      nl.d_yy(old.y[i]) * old.p[i] * dy +
                      switched * (mu[i] + rho * (next.y[i] - data.psi[i]));
        }
        entry.r2 = space.norm_l2(work);
        for (std::size_t i = 0; i < n; ++i) {
            work[i] = next.u[i] - std::clamp(-next.p[i] / data.alpha, data.u_a[i], data.u_b[i]);
        }
        entry.r3 = space.norm_l2(work);

        const bool finite = std::isfinite(entry.r1) && std::isfinite(entry.r2) && std::isfinite(entry.r3);
        result.trace.push_back(entry);
        result.state = std::move(next);
        sets = next_sets;
        result.inner_iters = it;
        if (!finite) throw SsnError("semismooth Newton produced non-finite iterates", result.trace);
        if (std::max({entry.r1, entry.r2, entry.r3}) <= cfg.tol) return result;
    }
    throw SsnError("semismooth Newton did not converge in " + std::to_string(cfg.max_iter) + " iterations",
                   result.trace);
}

OuterResidual residual_R(std::span<const double> y, std::span<const double> mu_bar, const ProblemData& data,
                         ComplementarityMode mode) {
    const Vec& d = data.lumped();
    OuterResidual r;
    double pairing = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        r.max_violation = std::max(r.max_violation, y[i] - data.psi[i]);
        const double term = d[i] * mu_bar[i] * (data.psi[i] - y[i]);
        pairing += (mode == ComplementarityMode::scalar) ? term : std::max(0.0, term);
    }
    r.complementarity = std::max(0.0, pairing);
    r.value = r.max_violation + r.complementarity;
    return r;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_outer: return "max_outer";
        case Termination::inner_failure: return "inner_failure";
    }
    return "unknown";
}

std::size_t AlReport::total_inner_iterations() const {
    std::size_t total = 0;
    for (const auto& r : records) total += r.inner_iters;
    return total;
}

double AlReport::rho_max() const {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.rho);
    return m;
}

double AlReport::final_mu_l1() const {
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
        if (it->successful) return it->mu_l1;
    }
    return 0.0;
}

double AlReport::max_mu_l1() const {
    double m = 0.0;
    for (const auto& r : records) m = std::max(m, r.mu_l1);
    return m;
}

AlReport outer_loop(const ProblemData& data, const AlConfig& cfg, const std::optional<OuterStart>& start,
                    const OuterObserver& observer) {
    cfg.validate();
    const std::size_t n_dof = data.n_dof();
    KktState state = start ? start->state : KktState::zeros(n_dof);
    Field mu = start ? start->mu : Field(n_dof, 0.0);
    if (state.y.size() != n_dof || mu.size() != n_dof) throw std::invalid_argument("outer_loop: start size mismatch");
    if (std::any_of(mu.begin(), mu.end(), [](double v) { return v < 0.0; })) {
        throw std::invalid_argument("outer_loop: initial multiplier must be nonnegative");
    }

    AlReport report;
    report.final_state = state;
    report.final_mu = mu;
    double rho = cfg.rho0;
    double r_plus = cfg.R0_plus;
    std::size_t n = 1;

    for (std::size_t k = 1; k <= cfg.max_outer; ++k) {
        AlRecord rec;
        rec.k = k;
        rec.n = n;
        rec.rho = rho;
        SubproblemResult sub;
        try {
            sub = solve_subproblem(mu, rho, state, data, cfg.inner);
        } catch (const SsnError& e) {
            rec.inner_iters = e.trace().size();
            rec.R = std::numeric_limits<double>::quiet_NaN();
            rec.mu_l1 = data.space->norm_l1(mu);
            if (observer) observer(rec, state, mu);
            if (cfg.on_inner_fail == InnerFailPolicy::abort) {
                report.records.push_back(rec);
                report.termination = Termination::inner_failure;
                report.message = "outer step " + std::to_string(k) + ": " + e.what();
                return report;
            }
            report.records.push_back(rec);
            rho *= cfg.theta;
            continue;
        }
        state = std::move(sub.state);
        rec.inner_iters = sub.inner_iters;

        const Field mu_bar = multiplier_update(mu, rho, state.y, data);
        const OuterResidual res = residual_R(state.y, mu_bar, data, cfg.complementarity);
        rec.R = res.value;
        rec.max_violation = res.max_violation;
        rec.complementarity = res.complementarity;
        rec.f = tracking_cost(state.y, state.u, data);
        rec.f_al = rec.f + penalty_term(state.y, mu, rho, data);

        // Ties count as success.
        if (res.value <= cfg.tau * r_plus) {
            rec.successful = true;
            mu = mu_bar;
            r_plus = res.value;
            report.final_state = state;
            report.final_mu = mu;
            ++n;
        } else {
            rho *= cfg.theta;
        }
        rec.mu_l1 = data.space->norm_l1(mu);
        report.records.push_back(rec);
        if (observer) observer(rec, state, mu);

        if (r_plus <= cfg.eps_outer) {
            report.termination = Termination::converged;
            report.message = "R+ = " + std::to_string(r_plus) + " <= eps";
            return report;
        }
    }
    report.termination = Termination::max_outer;
    report.message = "outer iteration limit reached";
    return report;
}

KktResiduals kkt_residuals(const KktState& state, std::span<const double> mu, const ProblemData& data) {
    KktResiduals k;
    const OuterResidual r = residual_R(state.y, mu, data, ComplementarityMode::scalar);
    k.max_violation = r.max_violation;
    k.complementarity = r.complementarity;
    for (std::size_t i = 0; i < state.u.size(); ++i) {
        const double proj = std::clamp(-state.p[i] / data.alpha, data.u_a[i], data.u_b[i]);
        k.projection = std::max(k.projection, std::abs(state.u[i] - proj));
    }
    k.mu_min = mu.empty() ? 0.0 : *std::min_element(mu.begin(), mu.end());
    return k;
}

}  // namespace alcp
