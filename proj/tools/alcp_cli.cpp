// Command-line front end: run a benchmark, convergence studies, and the
// penalty-rate diagnostic.

#include "alcp/io.hpp"
#include "alcp/problems.hpp"
#include "alcp/runner.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <iostream>
#include <sstream>

namespace {

std::size_t parse_dof(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !(v >= 1.0)) throw std::invalid_argument("invalid DOF value '" + s + "'");
    return static_cast<std::size_t>(std::llround(v));
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& s, Parse parse) {
    std::vector<T> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(parse(item));
    }
    return out;
}

struct CommonFlags {
    std::string problem;
    std::string dof;
    std::string config;
    std::string out;
    std::optional<double> alpha, tau, rho0, theta;
    std::string on_inner_fail;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--problem", f.problem, "example1 | example2 | example3");
    cmd->add_option("--config", f.config, "JSON config with flat override keys");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--alpha", f.alpha, "control cost weight override");
    cmd->add_option("--tau", f.tau, "success factor tau in (0,1)");
    cmd->add_option("--rho0", f.rho0, "initial penalty parameter");
    cmd->add_option("--theta", f.theta, "penalty increase factor (>1)");
    cmd->add_option("--on-inner-fail", f.on_inner_fail, "abort | increase-rho");
}

alcp::RunConfig build_config(const CommonFlags& f) {
    alcp::RunConfig cfg = f.config.empty() ? alcp::RunConfig{} : alcp::load_run_config(f.config);
    if (!f.problem.empty()) cfg.problem = f.problem;
    if (!f.dof.empty()) cfg.dof = parse_dof(f.dof);
    if (!f.out.empty()) cfg.output_dir = f.out;
    if (f.alpha) cfg.alpha = f.alpha;
    if (f.tau) cfg.overrides.tau = f.tau;
    if (f.rho0) cfg.overrides.rho0 = f.rho0;
    if (f.theta) cfg.overrides.theta = f.theta;
    if (!f.on_inner_fail.empty()) cfg.overrides.on_inner_fail = alcp::parse_inner_fail_policy(f.on_inner_fail);
    // Fail early with the list of valid names.
    const auto& names = alcp::benchmark_names();
    if (std::find(names.begin(), names.end(), cfg.problem) == names.end()) {
        (void)alcp::make_benchmark(cfg.problem, {});
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Augmented Lagrange solver for state-constrained semilinear elliptic control problems"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string emit = "csv,json,vtk";
    std::string warm_start;
    auto* run_cmd = app.add_subcommand("run", "solve one benchmark and write report and fields");
    add_common(run_cmd, run_flags);
    run_cmd->add_option("--dof", run_flags.dof, "target number of degrees of freedom (e.g. 1e4)");
    run_cmd->add_option("--emit", emit, "comma list of csv,json,vtk");
    run_cmd->add_option("--warm-start", warm_start, "directory with y.csv,u.csv,p.csv,mu.csv from an earlier run");

    CommonFlags study_flags;
    std::string dofs = "1e2,1e3,1e4";
    auto* study_cmd = app.add_subcommand("study", "iteration counts and errors over several discretizations");
    add_common(study_cmd, study_flags);
    study_cmd->add_option("--dofs", dofs, "comma list of DOF targets");

    CommonFlags rate_flags;
    std::string rhos = "1e1,1e2,1e3,1e4,1e5";
    auto* rate_cmd = app.add_subcommand("rate", "control error vs penalty parameter with zero multiplier");
    add_common(rate_cmd, rate_flags);
    rate_cmd->add_option("--dof", rate_flags.dof, "target number of degrees of freedom");
    rate_cmd->add_option("--rhos", rhos, "comma list of penalty parameters");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            alcp::RunConfig cfg = build_config(run_flags);
            if (run_cmd->count("--emit")) alcp::parse_emit_list(emit, cfg);
            if (!warm_start.empty()) cfg.warm_start_dir = warm_start;
            const alcp::RunOutcome out = alcp::run(cfg);
            const auto& r = out.report;
            std::cout << out.problem << " dof=" << out.dof << " outer=" << r.outer_iterations()
                      << " inner=" << r.total_inner_iterations() << " rho_max=" << alcp::format_number(r.rho_max())
                      << " mu_l1=" << alcp::format_number(r.final_mu_l1())
                      << " termination=" << alcp::to_string(r.termination) << '\n';
            if (out.errors) {
                std::cout << "err_y=" << alcp::format_number(out.errors->err_y)
                          << " err_u=" << alcp::format_number(out.errors->err_u)
                          << " err_p=" << alcp::format_number(out.errors->err_p) << '\n';
            }
            if (!r.converged()) {
                std::cerr << "error: " << r.message << '\n';
                return 2;
            }
            return 0;
        }
        if (*study_cmd) {
            const alcp::RunConfig cfg = build_config(study_flags);
            const auto result = alcp::convergence_study(cfg, parse_list<std::size_t>(dofs, parse_dof));
            bool all_ok = true;
            for (const auto& row : result.rows) {
                std::cout << "dof=" << row.dof << " outer=" << row.it_outer << " inner=" << row.it_inner
                          << " rho_max=" << alcp::format_number(row.rho_max)
                          << " mu_l1=" << alcp::format_number(row.mu_l1) << " status=" << row.status << '\n';
                all_ok = all_ok && row.status == "converged";
            }
            if (result.slope_err_u) std::cout << "slope(err_u vs dof)=" << alcp::format_number(*result.slope_err_u) << '\n';
            return all_ok ? 0 : 2;
        }
        if (*rate_cmd) {
            const alcp::RunConfig cfg = build_config(rate_flags);
            const auto result = alcp::rate_diagnostic(
                cfg, parse_list<double>(rhos, [](const std::string& s) { return std::stod(s); }));
            for (const auto& row : result.rows) {
                std::cout << "rho=" << alcp::format_number(row.rho) << " err_u=" << alcp::format_number(row.err_u)
                          << '\n';
            }
            if (result.slope) {
                std::cout << "slope=" << alcp::format_number(*result.slope)
                          << (result.consistent_with_rate() ? " (consistent with gamma=1/8)" : "") << '\n';
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
