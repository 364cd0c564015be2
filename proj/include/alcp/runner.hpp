#pragma once

#include "alcp/alm.hpp"
#include "alcp/problems.hpp"

#include <optional>
#include <string>
#include <vector>

namespace alcp {

/// Optional overrides on top of a benchmark's default AlConfig. Flat JSON
/// keys: alm.rho0, alm.tau, alm.theta, alm.eps_outer, alm.R0_plus,
/// alm.max_outer, alm.complementarity, alm.on_inner_fail, ssn.tol,
/// ssn.max_iter, linalg.rel_tol.
struct AlOverrides {
    std::optional<double> rho0;
    std::optional<double> tau;
    std::optional<double> theta;
    std::optional<double> eps_outer;
    std::optional<double> R0_plus;
    std::optional<std::size_t> max_outer;
    std::optional<ComplementarityMode> complementarity;
    std::optional<InnerFailPolicy> on_inner_fail;
    std::optional<double> ssn_tol;
    std::optional<std::size_t> ssn_max_iter;
    std::optional<double> linear_rel_tol;

    void apply(AlConfig& cfg) const;
};

struct RunConfig {
    std::string problem = "example1";
    std::size_t dof = 10000;
    std::optional<double> alpha;
    AlOverrides overrides;
    std::string output_dir = ".";
    bool emit_csv = true;
    bool emit_json = true;
    bool emit_vtk = true;
    std::optional<std::string> warm_start_dir;

    void validate() const;
};

/// Merges a JSON config document into cfg. Unknown keys are rejected.
void apply_config_json(const std::string& json_text, RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

InnerFailPolicy parse_inner_fail_policy(const std::string& s);
ComplementarityMode parse_complementarity(const std::string& s);
/// Parses "csv,json,vtk" style lists.
void parse_emit_list(const std::string& s, RunConfig& cfg);

struct RunOutcome {
    std::string problem;
    std::size_t dof = 0;
    AlConfig config;
    AlReport report;
    std::optional<ErrorReport> errors;
};

/// Builds the benchmark and runs the outer loop, without touching the disk
/// (except reading a warm start).
RunOutcome solve_benchmark(const RunConfig& cfg);

/// solve_benchmark plus report.csv, report.json and fields.vtk / field CSVs
/// in cfg.output_dir.
RunOutcome run(const RunConfig& cfg);

/// Least-squares slope of log y against log x; empty with fewer than two
/// usable points.
std::optional<double> fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct StudyRow {
    std::size_t dof_target = 0;
    std::size_t dof = 0;
    std::string status = "ok";
    std::size_t it_outer = 0;
    std::size_t it_inner = 0;
    double rho_max = 0.0;
    double mu_l1 = 0.0;
    double max_mu_l1 = 0.0;
    std::optional<ErrorReport> errors;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    std::optional<double> slope_err_u;
};

/// One full run per DOF target; failing rows are recorded and skipped.
/// Writes study.csv and study.json when write_files is set.
StudyResult convergence_study(const RunConfig& base, const std::vector<std::size_t>& dofs, bool write_files = true);

struct RateRow {
    double rho = 0.0;
    double err_u = 0.0;
    std::size_t inner_iters = 0;
};

struct RateResult {
    std::vector<RateRow> rows;
    std::optional<double> slope;
    /// |slope| within [0.05, 0.5]; informational only.
    bool consistent_with_rate() const;
};

/// One subproblem per ρ with μ ≡ 0 from zero fields; error of u against the
/// exact control. Writes diag.csv when write_files is set.
RateResult rate_diagnostic(const RunConfig& base, const std::vector<double>& rhos, bool write_files = true);

}  // namespace alcp
