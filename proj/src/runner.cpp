#include "alcp/runner.hpp"

#include "alcp/io.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace alcp {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void AlOverrides::apply(AlConfig& cfg) const {
    if (rho0) cfg.rho0 = *rho0;
    if (tau) cfg.tau = *tau;
    if (theta) cfg.theta = *theta;
    if (eps_outer) cfg.eps_outer = *eps_outer;
    if (R0_plus) cfg.R0_plus = *R0_plus;
    if (max_outer) cfg.max_outer = *max_outer;
    if (complementarity) cfg.complementarity = *complementarity;
    if (on_inner_fail) cfg.on_inner_fail = *on_inner_fail;
    if (ssn_tol) cfg.inner.tol = *ssn_tol;
    if (ssn_max_iter) cfg.inner.max_iter = *ssn_max_iter;
    if (linear_rel_tol) cfg.inner.linear_rel_tol = *linear_rel_tol;
}

void RunConfig::validate() const {
    if (dof < 10) throw std::invalid_argument("dof target must be at least 10");
    if (output_dir.empty()) throw std::invalid_argument("output directory must not be empty");
}

InnerFailPolicy parse_inner_fail_policy(const std::string& s) {
    if (s == "abort") return InnerFailPolicy::abort;
    if (s == "increase-rho") return InnerFailPolicy::increase_rho;
    throw std::invalid_argument("on-inner-fail must be 'abort' or 'increase-rho', got '" + s + "'");
}

ComplementarityMode parse_complementarity(const std::string& s) {
    if (s == "scalar") return ComplementarityMode::scalar;
    if (s == "pointwise") return ComplementarityMode::pointwise;
    throw std::invalid_argument("complementarity must be 'scalar' or 'pointwise', got '" + s + "'");
}

void parse_emit_list(const std::string& s, RunConfig& cfg) {
    cfg.emit_csv = cfg.emit_json = cfg.emit_vtk = false;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item == "csv") cfg.emit_csv = true;
        else if (item == "json") cfg.emit_json = true;
        else if (item == "vtk") cfg.emit_vtk = true;
        else if (!item.empty()) throw std::invalid_argument("unknown emit target '" + item + "'");
    }
}

namespace {

std::size_t as_count(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number()) {
        const double d = v.get<double>();
        if (d >= 0 && std::floor(d) == d) return static_cast<std::size_t>(d);
    }
    throw std::invalid_argument("config key '" + key + "' must be a nonnegative integer");
}

double as_real(const json& v, const std::string& key) {
    if (!v.is_number()) throw std::invalid_argument("config key '" + key + "' must be a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw std::invalid_argument("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

json config_to_json(const RunOutcome& out, const RunConfig& rc) {
    const AlConfig& c = out.config;
    json j;
    j["problem"] = out.problem;
    j["dof_target"] = rc.dof;
    j["dof"] = out.dof;
    if (rc.alpha) j["alpha"] = *rc.alpha;
    j["alm.rho0"] = c.rho0;
    j["alm.tau"] = c.tau;
    j["alm.theta"] = c.theta;
    j["alm.eps_outer"] = c.eps_outer;
    j["alm.R0_plus"] = c.R0_plus;
    j["alm.max_outer"] = c.max_outer;
    j["alm.complementarity"] = c.complementarity == ComplementarityMode::scalar ? "scalar" : "pointwise";
    j["alm.on_inner_fail"] = c.on_inner_fail == InnerFailPolicy::abort ? "abort" : "increase-rho";
    j["ssn.tol"] = c.inner.tol;
    j["ssn.max_iter"] = c.inner.max_iter;
    j["linalg.rel_tol"] = c.inner.linear_rel_tol;
    if (rc.warm_start_dir) j["warm_start"] = *rc.warm_start_dir;
    return j;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json report_to_json(const RunOutcome& out, const RunConfig& rc) {
    json j;
    j["config"] = config_to_json(out, rc);
    const AlReport& r = out.report;
    j["termination"] = to_string(r.termination);
    j["message"] = r.message;
    j["summary"] = {{"outer_iterations", r.outer_iterations()},
                    {"inner_iterations", r.total_inner_iterations()},
                    {"rho_max", r.rho_max()},
                    {"mu_l1", r.final_mu_l1()},
                    {"max_mu_l1", r.max_mu_l1()}};
    if (out.errors) {
        j["errors"] = {{"err_y", out.errors->err_y},
                       {"err_u", out.errors->err_u},
                       {"err_p", out.errors->err_p},
                       {"singular_node_excluded", out.errors->singular_excluded}};
    }
    json rows = json::array();
    for (const auto& rec : r.records) {
        rows.push_back({{"k", rec.k},
                        {"n", rec.n},
                        {"rho", rec.rho},
                        {"R_k", number_or_null(rec.R)},
                        {"successful", rec.successful},
                        {"inner_iters", rec.inner_iters},
                        {"mu_l1", rec.mu_l1},
                        {"f", rec.f},
                        {"f_al", rec.f_al},
                        {"max_violation", rec.max_violation},
                        {"complementarity", rec.complementarity}});
    }
    j["records"] = rows;
    return j;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

std::optional<OuterStart> read_warm_start(const std::string& dir, std::size_t n) {
    const auto load = [&](const char* name) {
        std::ifstream is(fs::path(dir) / name);
        if (!is) throw std::runtime_error("warm start: cannot open " + (fs::path(dir) / name).string());
        return read_field_csv(is, n);
    };
    OuterStart s{{load("y.csv"), load("u.csv"), load("p.csv")}, load("mu.csv")};
    return s;
}

}  // namespace

void apply_config_json(const std::string& json_text, RunConfig& cfg) {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    AlOverrides& o = cfg.overrides;
    for (const auto& [key, v] : doc.items()) {
        if (key == "problem") cfg.problem = as_string(v, key);
        else if (key == "dof") cfg.dof = as_count(v, key);
        else if (key == "alpha") cfg.alpha = as_real(v, key);
        else if (key == "output_dir") cfg.output_dir = as_string(v, key);
        else if (key == "emit") parse_emit_list(as_string(v, key), cfg);
        else if (key == "warm_start") cfg.warm_start_dir = as_string(v, key);
        else if (key == "alm.rho0") o.rho0 = as_real(v, key);
        else if (key == "alm.tau") o.tau = as_real(v, key);
        else if (key == "alm.theta") o.theta = as_real(v, key);
        else if (key == "alm.eps_outer") o.eps_outer = as_real(v, key);
        else if (key == "alm.R0_plus") o.R0_plus = as_real(v, key);
        else if (key == "alm.max_outer") o.max_outer = as_count(v, key);
        else if (key == "alm.complementarity") o.complementarity = parse_complementarity(as_string(v, key));
        else if (key == "alm.on_inner_fail") o.on_inner_fail = parse_inner_fail_policy(as_string(v, key));
        else if (key == "ssn.tol") o.ssn_tol = as_real(v, key);
        else if (key == "ssn.max_iter") o.ssn_max_iter = as_count(v, key);
        else if (key == "linalg.rel_tol") o.linear_rel_tol = as_real(v, key);
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    RunConfig cfg;
    apply_config_json(buf.str(), cfg);
    return cfg;
}

RunOutcome solve_benchmark(const RunConfig& cfg) {
    cfg.validate();
    ProblemOptions opts;
    opts.dof = cfg.dof;
    opts.alpha = cfg.alpha;
    Benchmark b = make_benchmark(cfg.problem, opts);

    RunOutcome out;
    out.problem = b.name;
    out.dof = b.data.n_dof();
    out.config = b.defaults;
    cfg.overrides.apply(out.config);
    std::optional<OuterStart> start;
    if (cfg.warm_start_dir) start = read_warm_start(*cfg.warm_start_dir, out.dof);
    out.report = outer_loop(b.data, out.config, start);
    if (b.exact) out.errors = error_report(out.report.final_state, b.exact, *b.data.space);
    return out;
}

RunOutcome run(const RunConfig& cfg) {
    RunOutcome out = solve_benchmark(cfg);
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    if (cfg.emit_csv) {
        auto os = open_output(dir / "report.csv");
        write_report_csv(os, out.report);
    }
    if (cfg.emit_json) {
        auto os = open_output(dir / "report.json");
        os << report_to_json(out, cfg).dump(2) << '\n';
    }
    // Fields are written against the mesh of a freshly built benchmark; the
    // constructors are deterministic so node numbering matches.
    if (cfg.emit_vtk || cfg.emit_csv) {
        ProblemOptions opts;
        opts.dof = cfg.dof;
        opts.alpha = cfg.alpha;
        const Benchmark b = make_benchmark(cfg.problem, opts);
        const Mesh& mesh = b.data.space->mesh();
        const KktState& s = out.report.final_state;
        const Field& mu = out.report.final_mu;
        if (cfg.emit_vtk) {
            auto os = open_output(dir / "fields.vtk");
            write_vtk(os, mesh, {{"y", &s.y}, {"u", &s.u}, {"p", &s.p}, {"mu", &mu}});
        }
        if (cfg.emit_csv) {
            for (const auto& [name, field] : std::vector<NamedField>{{"y", &s.y}, {"u", &s.u}, {"p", &s.p}, {"mu", &mu}}) {
                auto os = open_output(dir / (name + ".csv"));
                write_field_csv(os, mesh, *field);
            }
        }
    }
    return out;
}

std::optional<double> fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
            pts.emplace_back(std::log(x[i]), std::log(y[i]));
        }
    }
    if (pts.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (const auto& [a, b] : pts) {
        mx += a;
        my += b;
    }
    mx /= double(pts.size());
    my /= double(pts.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [a, b] : pts) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

StudyResult convergence_study(const RunConfig& base, const std::vector<std::size_t>& dofs, bool write_files) {
    StudyResult result;
    std::vector<double> xs, ys;
    for (std::size_t target : dofs) {
        RunConfig cfg = base;
        cfg.dof = target;
        StudyRow row;
        row.dof_target = target;
        try {
            const RunOutcome out = solve_benchmark(cfg);
            row.dof = out.dof;
            row.it_outer = out.report.outer_iterations();
            row.it_inner = out.report.total_inner_iterations();
            row.rho_max = out.report.rho_max();
            row.mu_l1 = out.report.final_mu_l1();
            row.max_mu_l1 = out.report.max_mu_l1();
            row.errors = out.errors;
            row.status = to_string(out.report.termination);
            if (out.report.converged() && out.errors) {
                xs.push_back(double(row.dof));
                ys.push_back(out.errors->err_u);
            }
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
        result.rows.push_back(row);
    }
    result.slope_err_u = fit_loglog_slope(xs, ys);

    if (write_files) {
        const fs::path dir(base.output_dir);
        fs::create_directories(dir);
        const std::string slope = result.slope_err_u ? format_number(*result.slope_err_u) : "";
        auto os = open_output(dir / "study.csv");
        os << "dof,it_outer,it_inner,rho_max,mu_l1,err_y,err_u,err_p,slope_err_u,status\r\n";
        json rows = json::array();
        for (const auto& r : result.rows) {
            const auto err = [&](double ErrorReport::*m) { return r.errors ? format_number((*r.errors).*m) : ""; };
            std::string status = r.status;
            for (char& c : status) {
                if (c == '"') c = '\'';
            }
            os << r.dof << ',' << r.it_outer << ',' << r.it_inner << ',' << format_number(r.rho_max) << ','
               << format_number(r.mu_l1) << ',' << err(&ErrorReport::err_y) << ',' << err(&ErrorReport::err_u) << ','
               << err(&ErrorReport::err_p) << ',' << slope << ",\"" << status << "\"\r\n";
            json jr = {{"dof_target", r.dof_target}, {"dof", r.dof},         {"it_outer", r.it_outer},
                       {"it_inner", r.it_inner},     {"rho_max", r.rho_max}, {"mu_l1", r.mu_l1},
                       {"max_mu_l1", r.max_mu_l1},   {"status", r.status}};
            if (r.errors) {
                jr["err_y"] = r.errors->err_y;
                jr["err_u"] = r.errors->err_u;
                jr["err_p"] = r.errors->err_p;
            }
            rows.push_back(jr);
        }
        json doc = {{"problem", base.problem}, {"rows", rows}};
        doc["slope_err_u"] = result.slope_err_u ? json(*result.slope_err_u) : json(nullptr);
        auto js = open_output(dir / "study.json");
        js << doc.dump(2) << '\n';
    }
    return result;
}

bool RateResult::consistent_with_rate() const {
    return slope && std::abs(*slope) >= 0.05 && std::abs(*slope) <= 0.5;
}

RateResult rate_diagnostic(const RunConfig& base, const std::vector<double>& rhos, bool write_files) {
    base.validate();
    ProblemOptions opts;
    opts.dof = base.dof;
    opts.alpha = base.alpha;
    const Benchmark b = make_benchmark(base.problem, opts);
    if (!b.exact) throw std::logic_error("rate diagnostic needs a problem with an exact solution");
    AlConfig cfg = b.defaults;
    base.overrides.apply(cfg);

    RateResult result;
    const Field mu(b.data.n_dof(), 0.0);
    std::vector<double> xs, ys;
    for (double rho : rhos) {
        const SubproblemResult sub = solve_subproblem(mu, rho, KktState::zeros(b.data.n_dof()), b.data, cfg.inner);
        const ErrorReport err = error_report(sub.state, b.exact, *b.data.space);
        result.rows.push_back({rho, err.err_u, sub.inner_iters});
        xs.push_back(rho);
        ys.push_back(err.err_u);
    }
    result.slope = fit_loglog_slope(xs, ys);

    if (write_files) {
        const fs::path dir(base.output_dir);
        fs::create_directories(dir);
        auto os = open_output(dir / "diag.csv");
        os << "rho,err_u,inner_iters,slope,consistent_with_gamma\r\n";
        const std::string slope = result.slope ? format_number(*result.slope) : "";
        const std::string consistent = result.slope ? (result.consistent_with_rate() ? "1" : "0") : "";
        for (const auto& r : result.rows) {
            os << format_number(r.rho) << ',' << format_number(r.err_u) << ',' << r.inner_iters << ',' << slope << ','
               << consistent << "\r\n";
        }
    }
    return result;
}

}  // namespace alcp
