#include "alcp/io.hpp"
#include "alcp/problems.hpp"
#include "alcp/runner.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace alcp;

namespace {

py::array_t<double> to_numpy(const Field& f) {
    py::array_t<double> out(static_cast<py::ssize_t>(f.size()));
    std::copy(f.begin(), f.end(), out.mutable_data());
    return out;
}

Field from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, std::size_t n,
                 const char* what) {
    if (a.ndim() != 1 || static_cast<std::size_t>(a.shape(0)) != n) {
        throw std::invalid_argument(std::string(what) + ": expected a 1-D array of length " + std::to_string(n));
    }
    return Field(a.data(), a.data() + n);
}

py::array_t<double> nodes_array(const Mesh& m) {
    py::array_t<double> out({static_cast<py::ssize_t>(m.n_dof()), py::ssize_t{2}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.n_dof(); ++i) {
        v(i, 0) = m.nodes()[i].x;
        v(i, 1) = m.nodes()[i].y;
    }
    return out;
}

py::array_t<std::int64_t> triangles_array(const Mesh& m) {
    py::array_t<std::int64_t> out({static_cast<py::ssize_t>(m.n_triangles()), py::ssize_t{3}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t t = 0; t < m.n_triangles(); ++t)
        for (int k = 0; k < 3; ++k) v(t, k) = static_cast<std::int64_t>(m.triangles()[t][k]);
    return out;
}

py::dict record_dict(const AlRecord& r) {
    py::dict d;
    d["k"] = r.k;
    d["n"] = r.n;
    d["rho"] = r.rho;
    d["R_k"] = r.R;
    d["successful"] = r.successful;
    d["inner_iters"] = r.inner_iters;
    d["mu_l1"] = r.mu_l1;
    d["f"] = r.f;
    d["f_al"] = r.f_al;
    d["max_violation"] = r.max_violation;
    d["complementarity"] = r.complementarity;
    return d;
}

const ProblemData& data_of(const Benchmark& b) { return b.data; }

}  // namespace

PYBIND11_MODULE(_alcp, m) {
    m.doc() = "Augmented Lagrangian solver for state-constrained semilinear elliptic optimal control";

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("nodes", &nodes_array)
        .def_property_readonly("triangles", &triangles_array)
        .def_property_readonly("boundary_nodes", &Mesh::boundary_nodes)
        .def_property_readonly("n_dof", &Mesh::n_dof)
        .def_property_readonly("n_triangles", &Mesh::n_triangles)
        .def("total_area", &Mesh::total_area)
        .def("min_angle_degrees", &Mesh::min_angle_degrees)
        .def("max_edge_length", &Mesh::max_edge_length);

    m.def("rect_mesh", &generate_rect_mesh, py::arg("x_min"), py::arg("x_max"), py::arg("y_min"), py::arg("y_max"),
          py::arg("nx"), py::arg("ny"));
    m.def("disk_mesh", &generate_disk_mesh, py::arg("radius"), py::arg("n_rings"));

    py::enum_<ComplementarityMode>(m, "ComplementarityMode")
        .value("scalar", ComplementarityMode::scalar)
        .value("pointwise", ComplementarityMode::pointwise);
    py::enum_<InnerFailPolicy>(m, "InnerFailPolicy")
        .value("abort", InnerFailPolicy::abort)
        .value("increase_rho", InnerFailPolicy::increase_rho);

    py::class_<AlConfig>(m, "AlConfig")
        .def(py::init<>())
        .def_readwrite("rho0", &AlConfig::rho0)
        .def_readwrite("tau", &AlConfig::tau)
        .def_readwrite("theta", &AlConfig::theta)
        .def_readwrite("eps_outer", &AlConfig::eps_outer)
        .def_readwrite("R0_plus", &AlConfig::R0_plus)
        .def_readwrite("max_outer", &AlConfig::max_outer)
        .def_readwrite("complementarity", &AlConfig::complementarity)
        .def_readwrite("on_inner_fail", &AlConfig::on_inner_fail)
        .def_property(
            "ssn_tol", [](const AlConfig& c) { return c.inner.tol; }, [](AlConfig& c, double v) { c.inner.tol = v; })
        .def_property(
            "ssn_max_iter", [](const AlConfig& c) { return c.inner.max_iter; },
            [](AlConfig& c, std::size_t v) { c.inner.max_iter = v; })
        .def("validate", &AlConfig::validate);

    py::class_<ErrorReport>(m, "ErrorReport")
        .def_readonly("err_y", &ErrorReport::err_y)
        .def_readonly("err_u", &ErrorReport::err_u)
        .def_readonly("err_p", &ErrorReport::err_p)
        .def_readonly("singular_excluded", &ErrorReport::singular_excluded);

    py::class_<Benchmark, std::shared_ptr<Benchmark>>(m, "Benchmark")
        .def_readonly("name", &Benchmark::name)
        .def_property_readonly("n_dof", [](const Benchmark& b) { return b.data.n_dof(); })
        .def_property_readonly("alpha", [](const Benchmark& b) { return b.data.alpha; })
        .def_property_readonly("mesh", [](const Benchmark& b) { return b.data.space->mesh(); })
        .def_property_readonly("lumped_mass", [](const Benchmark& b) { return to_numpy(b.data.lumped()); })
        .def_property_readonly("y_d", [](const Benchmark& b) { return to_numpy(b.data.y_d); })
        .def_property_readonly("psi", [](const Benchmark& b) { return to_numpy(b.data.psi); })
        .def_property_readonly("u_a", [](const Benchmark& b) { return to_numpy(b.data.u_a); })
        .def_property_readonly("u_b", [](const Benchmark& b) { return to_numpy(b.data.u_b); })
        .def_property_readonly("has_exact", [](const Benchmark& b) { return b.exact.has_value(); })
        .def_readonly("defaults", &Benchmark::defaults)
        .def(
            "exact_fields",
            [](const Benchmark& b) {
                if (!b.exact) throw std::logic_error("benchmark has no exact solution");
                const auto& s = *b.data.space;
                py::dict d;
                d["y"] = to_numpy(s.interpolate(b.exact->y));
                d["p"] = to_numpy(s.interpolate(b.exact->p));
                if (!b.exact->singular_point) d["u"] = to_numpy(s.interpolate(b.exact->u));
                if (b.exact->mu) d["mu"] = to_numpy(s.interpolate(b.exact->mu));
                return d;
            },
            "Nodal interpolants of the exact solution; u is omitted when singular at a point.")
        .def(
            "norm_l2", [](const Benchmark& b, const py::array_t<double>& f) {
                return b.data.space->norm_l2(from_numpy(f, b.data.n_dof(), "norm_l2"));
            })
        .def("norm_l1", [](const Benchmark& b, const py::array_t<double>& f) {
            return b.data.space->norm_l1(from_numpy(f, b.data.n_dof(), "norm_l1"));
        });

    m.def("benchmark_names", &benchmark_names);
    m.def(
        "make_benchmark",
        [](const std::string& name, std::size_t dof, std::optional<double> alpha) {
            return std::make_shared<Benchmark>(make_benchmark(name, {.dof = dof, .alpha = alpha}));
        },
        py::arg("name"), py::arg("dof") = 10000, py::arg("alpha") = py::none());

    m.def(
        "solve_state",
        [](const Benchmark& b, const py::array_t<double>& u) {
            return to_numpy(solve_state(from_numpy(u, b.data.n_dof(), "u"), data_of(b)).y);
        },
        py::arg("benchmark"), py::arg("u"), "Control-to-state map: Newton solve of the state equation.");
    m.def(
        "al_cost",
        [](const Benchmark& b, const py::array_t<double>& u, const py::array_t<double>& mu, double rho) {
            const std::size_t n = b.data.n_dof();
            return al_cost(from_numpy(u, n, "u"), from_numpy(mu, n, "mu"), rho, data_of(b));
        },
        py::arg("benchmark"), py::arg("u"), py::arg("mu"), py::arg("rho"));
    m.def(
        "al_reduced_gradient",
        [](const Benchmark& b, const py::array_t<double>& u, const py::array_t<double>& mu, double rho) {
            const std::size_t n = b.data.n_dof();
            return to_numpy(al_reduced_gradient(from_numpy(u, n, "u"), from_numpy(mu, n, "mu"), rho, data_of(b)));
        },
        py::arg("benchmark"), py::arg("u"), py::arg("mu"), py::arg("rho"),
        "Gradient p + alpha*u of al_cost with respect to the lumped-mass inner product.");

    py::class_<AlReport>(m, "AlReport")
        .def_property_readonly("converged", &AlReport::converged)
        .def_property_readonly("termination", [](const AlReport& r) { return to_string(r.termination); })
        .def_readonly("message", &AlReport::message)
        .def_property_readonly("outer_iterations", &AlReport::outer_iterations)
        .def_property_readonly("inner_iterations", &AlReport::total_inner_iterations)
        .def_property_readonly("rho_max", &AlReport::rho_max)
        .def_property_readonly("mu_l1", &AlReport::final_mu_l1)
        .def_property_readonly("max_mu_l1", &AlReport::max_mu_l1)
        .def_property_readonly("records",
                               [](const AlReport& r) {
                                   py::list out;
                                   for (const auto& rec : r.records) out.append(record_dict(rec));
                                   return out;
                               })
        .def_property_readonly("y", [](const AlReport& r) { return to_numpy(r.final_state.y); })
        .def_property_readonly("u", [](const AlReport& r) { return to_numpy(r.final_state.u); })
        .def_property_readonly("p", [](const AlReport& r) { return to_numpy(r.final_state.p); })
        .def_property_readonly("mu", [](const AlReport& r) { return to_numpy(r.final_mu); });

    m.def(
        "outer_loop",
        [](const Benchmark& b, std::optional<AlConfig> cfg) {
            py::gil_scoped_release release;
            return outer_loop(b.data, cfg.value_or(b.defaults));
        },
        py::arg("benchmark"), py::arg("config") = py::none(),
        "Runs the augmented Lagrange method; uses the benchmark defaults when no config is given.");
    m.def(
        "error_report",
        [](const Benchmark& b, const AlReport& r) { return error_report(r.final_state, b.exact, *b.data.space); },
        py::arg("benchmark"), py::arg("report"));

    m.def(
        "run",
        [](const std::string& problem, std::size_t dof, const std::string& output_dir, std::optional<double> alpha,
           const std::string& emit) {
            RunConfig cfg;
            cfg.problem = problem;
            cfg.dof = dof;
            cfg.alpha = alpha;
            cfg.output_dir = output_dir;
            parse_emit_list(emit, cfg);
            RunOutcome out;
            {
                py::gil_scoped_release release;
                out = run(cfg);
            }
            return out.report;
        },
        py::arg("problem"), py::arg("dof"), py::arg("output_dir"), py::arg("alpha") = py::none(),
        py::arg("emit") = "csv,json,vtk", "Solves a benchmark and writes report.csv, report.json and field files.");
}
