#pragma once

#include "alcp/fem.hpp"
#include "alcp/linalg.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace alcp {

/// Monotone nonlinearity d(y) with its first two derivatives, evaluated
/// pointwise at nodal values. d_y ≥ 0 is required and checked on iterates.
struct Nonlinearity {
    std::function<double(double)> d;
    std::function<double(double)> d_y;
    std::function<double(double)> d_yy;

    static Nonlinearity zero();
    static Nonlinearity exponential();
    /// y ↦ y^k for odd k ≥ 1.
    static Nonlinearity odd_power(int k);
};

/// Everything defining one discrete control problem
///   min ½‖y−y_d‖² + (α/2)‖u‖²   s.t.  −Δy + a₀y + d(y) = u + f,  y ≤ ψ,  u_a ≤ u ≤ u_b
/// together with the assembled operators. Build through make_problem_data.
struct ProblemData {
    std::shared_ptr<const FemSpace> space;
    SparseMatrix stiffness;  // K: −Δ + a₀ with natural boundary conditions
    Field a0;
    Nonlinearity nonlinearity;
    Field y_d;
    Field f;
    Field psi;
    Field u_a;  // entries may be −∞
    Field u_b;  // entries may be +∞
    double alpha = 1.0;
    Vec source;  // M f

    std::size_t n_dof() const { return space->n_dof(); }
    const Vec& lumped() const { return space->lumped(); }
    const SparseMatrix& mass() const { return space->mass(); }
    bool has_control_bounds() const;
};

ProblemData make_problem_data(std::shared_ptr<const FemSpace> space, Field a0, Nonlinearity nonlinearity,
                              Field y_d, Field f, Field psi, Field u_a, Field u_b, double alpha);

enum class Damping { none, armijo };

struct NewtonConfig {
    double tol_residual = 1e-12;
    std::size_t max_iter = 30;
    Damping damping = Damping::armijo;
};

/// Newton failure on the state equation; carries the residual trace.
class NewtonError : public std::runtime_error {
public:
    NewtonError(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

/// d_y < 0 encountered: the monotonicity assumption on d is violated.
class ModelViolation : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateSolution {
    Field y;
    std::size_t iterations = 0;
    std::vector<double> residual_history;
};

/// F(y) = K y + D∘d(y) − D u − M f
Vec state_residual(std::span<const double> y, std::span<const double> u, const ProblemData& data);

/// K + diag(D∘d_y(y)); throws ModelViolation if d_y(y_i) < 0 anywhere.
SparseMatrix linearized_operator(std::span<const double> y, const ProblemData& data);

/// Control-to-state map S. Newton from `initial` (zero when absent). When a₀ ≡ 0
/// and d_y vanishes on the start field, the Jacobian is singular; the start is
/// then moved to the constant satisfying the compatibility condition.
StateSolution solve_state(std::span<const double> u, const ProblemData& data, const NewtonConfig& cfg = {},
                          const std::optional<Field>& initial = std::nullopt);

/// S′(u)h: (K + D∘d_y(y)) y_h = D h.
Field solve_linearized(std::span<const double> y, std::span<const double> h, const ProblemData& data);

/// S″(u)[h₁,h₂]: (K + D∘d_y(y)) z = −D∘(d_yy(y) y_h₁ y_h₂).
Field apply_second_derivative(std::span<const double> y, std::span<const double> h1, std::span<const double> h2,
                              const ProblemData& data);

/// (K + D∘d_y(y)) p = M(y − y_d) + D∘μ
Field solve_adjoint(std::span<const double> y, std::span<const double> mu, const ProblemData& data);

/// Nodal clamp to [u_a, u_b].
Field project_box(std::span<const double> v, const ProblemData& data);

/// (μ + ρ(y − ψ))₊ at every node.
Field multiplier_update(std::span<const double> mu, double rho, std::span<const double> y, const ProblemData& data);

/// ½‖y−y_d‖²_M + (α/2) uᵀDu
double tracking_cost(std::span<const double> y, std::span<const double> u, const ProblemData& data);

/// (1/2ρ) Σ D_i ((μ_i + ρ(y_i − ψ_i))₊)²
double penalty_term(std::span<const double> y, std::span<const double> mu, double rho, const ProblemData& data);

struct AlEvaluation {
    Field y;
    double cost = 0.0;
};

AlEvaluation evaluate_al(std::span<const double> u, std::span<const double> mu, double rho, const ProblemData& data,
                         const NewtonConfig& cfg = {}, const std::optional<Field>& initial = std::nullopt);

double al_cost(std::span<const double> u, std::span<const double> mu, double rho, const ProblemData& data,
               const NewtonConfig& cfg = {});

/// p + αu, the lumped-L² representative of the derivative of al_cost.
Field al_reduced_gradient(std::span<const double> u, std::span<const double> mu, double rho, const ProblemData& data,
                          const NewtonConfig& cfg = {});

/// SPD solve used by the state, linearized and adjoint equations: Jacobi CG,
/// falling back to sparse LU when CG stalls on a badly conditioned operator.
Vec solve_spd(const SparseMatrix& a, std::span<const double> b, double rel_tol = 1e-12, double abs_tol = 1e-16);

}  // namespace alcp
