#pragma once

#include "alcp/pde.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace alcp {

struct SsnConfig {
    double tol = 1e-6;
    std::size_t max_iter = 100;
    double linear_rel_tol = 1e-12;  // sparse LU residual check on each Newton system
};

/// How the complementarity part of the outer residual is measured:
/// `scalar` is max(0, (μ̄, ψ−y)); `pointwise` is Σ D_i (μ̄_i(ψ_i−y_i))₊.
enum class ComplementarityMode { scalar, pointwise };

enum class InnerFailPolicy { abort, increase_rho };

struct AlConfig {
    double rho0 = 0.5;
    double tau = 0.1;
    double theta = 10.0;
    double eps_outer = 1e-6;
    double R0_plus = 1e10;
    std::size_t max_outer = 100;
    SsnConfig inner;
    ComplementarityMode complementarity = ComplementarityMode::scalar;
    InnerFailPolicy on_inner_fail = InnerFailPolicy::abort;

    void validate() const;
};

/// Characteristic vectors of the active sets, one byte per node.
struct ActiveSets {
    std::vector<std::uint8_t> lower;    // −p/α ≤ u_a
    std::vector<std::uint8_t> upper;    // −p/α ≥ u_b
    std::vector<std::uint8_t> penalty;  // μ + ρ(y − ψ) > 0

    static std::vector<std::size_t> indices(const std::vector<std::uint8_t>& mask);
    bool operator==(const ActiveSets&) const = default;
};

ActiveSets compute_active_sets(std::span<const double> y, std::span<const double> p, std::span<const double> mu,
                               double rho, const ProblemData& data);

struct KktState {
    Field y;
    Field u;
    Field p;

    static KktState zeros(std::size_t n) { return {Field(n, 0.0), Field(n, 0.0), Field(n, 0.0)}; }
};

/// Newton matrix G and residual F of the active-set reformulation, 3n×3n,
/// ordered (y, u, p). Rows: state equation, adjoint equation, control equation
/// (the last scaled by the lumped mass).
struct SsnSystem {
    SparseMatrix matrix;
    Vec residual;
};

SsnSystem assemble_ssn_system(const KktState& state, std::span<const double> mu, double rho, const ActiveSets& sets,
                              const ProblemData& data);

struct SsnStep {
    Field dy;
    Field du;
    Field dp;
    double residual_norm = 0.0;  // ‖F‖₂ at the input point
};

/// One semismooth Newton step. δu is eliminated nodally and the remaining
/// 2n×2n system is solved by sparse LU.
SsnStep ssn_step(const KktState& state, std::span<const double> mu, double rho, const ProblemData& data,
                 const SsnConfig& cfg = {});

struct SsnTraceEntry {
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    double residual_norm = 0.0;
    std::size_t changed_nodes = 0;  // active-set membership changes in this step
};

class SsnError : public std::runtime_error {
public:
    SsnError(const std::string& what, std::vector<SsnTraceEntry> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<SsnTraceEntry>& trace() const { return trace_; }

private:
    std::vector<SsnTraceEntry> trace_;
};

struct SubproblemResult {
    KktState state;
    std::size_t inner_iters = 0;
    std::vector<SsnTraceEntry> trace;
};

/// Semismooth Newton on the subproblem optimality system for fixed (μ, ρ).
/// Stops once max(r₁, r₂, r₃) ≤ cfg.tol; at least one step is taken.
SubproblemResult solve_subproblem(std::span<const double> mu, double rho, const KktState& init,
                                  const ProblemData& data, const SsnConfig& cfg = {});

struct OuterResidual {
    double value = 0.0;
    double max_violation = 0.0;
    double complementarity = 0.0;
};

OuterResidual residual_R(std::span<const double> y, std::span<const double> mu_bar, const ProblemData& data,
                         ComplementarityMode mode = ComplementarityMode::scalar);

struct AlRecord {
    std::size_t k = 0;
    std::size_t n = 0;
    double rho = 0.0;
    double R = 0.0;
    bool successful = false;
    std::size_t inner_iters = 0;
    double mu_l1 = 0.0;
    double f = 0.0;
    double f_al = 0.0;
    double max_violation = 0.0;
    double complementarity = 0.0;
};

enum class Termination { converged, max_outer, inner_failure };

std::string to_string(Termination t);

struct AlReport {
    std::vector<AlRecord> records;
    KktState final_state;  // last successful iterate
    Field final_mu;
    Termination termination = Termination::max_outer;
    std::string message;

    bool converged() const { return termination == Termination::converged; }
    std::size_t outer_iterations() const { return records.size(); }
    std::size_t total_inner_iterations() const;
    double rho_max() const;
    double final_mu_l1() const;
    double max_mu_l1() const;
};

struct OuterStart {
    KktState state;
    Field mu;
};

/// Called once per outer step with its record, the current iterate and the
/// multiplier after the (possibly skipped) update.
using OuterObserver = std::function<void(const AlRecord&, const KktState&, const Field&)>;

/// Augmented Lagrange outer loop with the success test R_k ≤ τ·R⁺_{n−1}.
/// Starts from zero fields unless `start` is given.
AlReport outer_loop(const ProblemData& data, const AlConfig& cfg = {},
                    const std::optional<OuterStart>& start = std::nullopt, const OuterObserver& observer = {});

struct KktResiduals {
    double max_violation = 0.0;
    double complementarity = 0.0;
    double projection = 0.0;  // ‖u − P(−p/α)‖_∞
    double mu_min = 0.0;
};

KktResiduals kkt_residuals(const KktState& state, std::span<const double> mu, const ProblemData& data);

}  // namespace alcp
