#include "alcp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace alcp {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

double radius(const Point& x) { return std::hypot(x.x, x.y); }

Field constant_field(std::size_t n, double v) { return Field(n, v); }

}  // namespace

// ---------------------------------------------------------------------------
// Example 2

namespace ex2 {

namespace {
constexpr double a = 0.75 * pi;

double quintic(double r) { return 32 - 120 * r + 180 * r * r - 130 * r * r * r + 45 * std::pow(r, 4) - 6 * std::pow(r, 5); }
double quintic_d1(double r) { return -120 + 360 * r - 390 * r * r + 180 * r * r * r - 30 * std::pow(r, 4); }
double quintic_d2(double r) { return 360 - 780 * r + 540 * r * r - 120 * r * r * r; }

double radial_w(double r) { return 1 - 1.25 * std::pow(r, 3) + 15.0 / 16.0 * std::pow(r, 4) - 3.0 / 16.0 * std::pow(r, 5); }
// w'(r)/r, regular at the origin.
double radial_w_d1_over_r(double r) { return -3.75 * r + 3.75 * r * r - 15.0 / 16.0 * r * r * r; }
double radial_w_laplacian(double r) { return -11.25 * r + 15.0 * r * r - 75.0 / 16.0 * r * r * r; }

double cosine_part(const Point& x) { return 2.0 * std::cos(a * x.x) * std::cos(a * x.y); }
}  // namespace

double y_bar(const Point& x) {
    const double r = radius(x);
    return r < 1.0 ? 1.0 : quintic(r);
}

double laplacian_y_bar(const Point& x) {
    const double r = radius(x);
    return r < 1.0 ? 0.0 : quintic_d2(r) + quintic_d1(r) / r;
}

double p_bar(const Point& x) { return cosine_part(x) * radial_w(radius(x)); }

double laplacian_p_bar(const Point& x) {
    const double r = radius(x);
    const double c = cosine_part(x);
    const double cx = -2.0 * a * std::sin(a * x.x) * std::cos(a * x.y);
    const double cy = -2.0 * a * std::cos(a * x.x) * std::sin(a * x.y);
    const double wr = radial_w_d1_over_r(r);
    return -2.0 * a * a * c * radial_w(r) + 2.0 * wr * (cx * x.x + cy * x.y) + c * radial_w_laplacian(r);
}

double mu_bar(const Point& x) {
    const double r = radius(x);
    return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
}

double u_bar(const Point& x, double alpha) { return std::clamp(-p_bar(x) / alpha, -5.0, 5.0); }

}  // namespace ex2

// ---------------------------------------------------------------------------
// Example 3

namespace ex3 {

double y_bar(const Point& x, double alpha) {
    const double r = radius(x);
    if (r > 1.0) return 0.0;
    const double r2_log = (r > 0.0) ? r * r * std::log(r) : 0.0;
    return -1.0 / (2.0 * pi * alpha) * (0.25 * r2_log - 0.5 * r * r + 0.25 * r * r * r + 0.25);
}

double u_bar(const Point& x, double alpha) {
    const double r = radius(x);
    if (r > 1.0) return 0.0;
    return 1.0 / (2.0 * pi * alpha) * (std::log(r) + r * r - r * r * r);
}

double p_bar(const Point& x, double alpha) { return -alpha * u_bar(x, alpha); }

double psi(const Point& x, double alpha) { return -1.0 / (2.0 * pi * alpha) * (0.25 - 0.5 * radius(x)); }

double y_d_tilde(const Point& x, double alpha) {
    const double r = radius(x);
    return y_bar(x, alpha) - (r <= 1.0 ? (4.0 - 9.0 * r) / (2.0 * pi) : 0.0);
}

double f_tilde(const Point& x) {
    const double r = radius(x);
    return r <= 1.0 ? -(4.0 - 9.0 * r + 4.0 * r * r - 4.0 * r * r * r) / (8.0 * pi) : 0.0;
}

}  // namespace ex3

// ---------------------------------------------------------------------------

Benchmark example1(const ProblemOptions& opts) {
    const std::size_t n = rect_subdivisions_for_dof(opts.dof);
    auto mesh = std::make_shared<const Mesh>(generate_rect_mesh(0.0, 1.0, 0.0, 1.0, n, n));
    auto space = std::make_shared<const FemSpace>(mesh);
    const std::size_t dofs = mesh->n_dof();
    const Field y_d = space->interpolate(
        [](const Point& x) { return 8.0 * std::sin(pi * x.x) * std::sin(pi * x.y) - 4.0; });

    Benchmark b;
    b.name = "example1";
    b.data = make_problem_data(space, constant_field(dofs, 1.0), Nonlinearity::exponential(), y_d,
                               constant_field(dofs, 0.0), constant_field(dofs, 1.0), constant_field(dofs, -100.0),
                               constant_field(dofs, 200.0), opts.alpha.value_or(1e-5));
    return b;
}

Benchmark example2(const ProblemOptions& opts) {
    const double alpha = opts.alpha.value_or(ex2::default_alpha);
    auto mesh = std::make_shared<const Mesh>(generate_disk_mesh(2.0, disk_rings_for_dof(opts.dof)));
    auto space = std::make_shared<const FemSpace>(mesh);
    const std::size_t dofs = mesh->n_dof();

    const auto f = [alpha](const Point& x) {
        const double y = ex2::y_bar(x);
        return -ex2::laplacian_y_bar(x) + y * y * y - ex2::u_bar(x, alpha);
    };
    const auto y_d = [](const Point& x) {
        const double y = ex2::y_bar(x);
        return ex2::laplacian_p_bar(x) - 3.0 * y * y * ex2::p_bar(x) + y + ex2::mu_bar(x);
    };

    Benchmark b;
    b.name = "example2";
    b.data = make_problem_data(space, constant_field(dofs, 0.0), Nonlinearity::odd_power(3), space->interpolate(y_d),
                               space->interpolate(f), constant_field(dofs, 1.0), constant_field(dofs, -5.0),
                               constant_field(dofs, 5.0), alpha);
    b.exact = ExactSolution{ex2::y_bar, [alpha](const Point& x) { return ex2::u_bar(x, alpha); }, ex2::p_bar,
                            ex2::mu_bar, std::nullopt};
    b.defaults.rho0 = 1.0;
    b.defaults.tau = 0.5;
    return b;
}

Benchmark example3(const ProblemOptions& opts) {
    const double alpha = opts.alpha.value_or(1.0);
    // (0,0) is a mesh node exactly when the subdivision count is a multiple of 3.
    const std::size_t n = rect_subdivisions_for_dof(opts.dof, 3);
    auto mesh = std::make_shared<const Mesh>(generate_rect_mesh(-1.0, 2.0, -1.0, 2.0, n, n));
    auto space = std::make_shared<const FemSpace>(mesh);
    const std::size_t dofs = mesh->n_dof();

    const auto y_d = [alpha](const Point& x) {
        const double y = ex3::y_bar(x, alpha);
        return ex3::y_d_tilde(x, alpha) - 5.0 * std::pow(y, 4) * ex3::p_bar(x, alpha);
    };
    const auto f = [alpha](const Point& x) { return ex3::f_tilde(x) + std::pow(ex3::y_bar(x, alpha), 5); };

    Benchmark b;
    b.name = "example3";
    b.data = make_problem_data(space, constant_field(dofs, 0.0), Nonlinearity::odd_power(5), space->interpolate(y_d),
                               space->interpolate(f),
                               space->interpolate([alpha](const Point& x) { return ex3::psi(x, alpha); }),
                               constant_field(dofs, -inf), constant_field(dofs, inf), alpha);
    b.exact = ExactSolution{[alpha](const Point& x) { return ex3::y_bar(x, alpha); },
                            [alpha](const Point& x) { return ex3::u_bar(x, alpha); },
                            [alpha](const Point& x) { return ex3::p_bar(x, alpha); }, PointFunction{},
                            Point{0.0, 0.0}};
    b.defaults.rho0 = 0.5;
    b.defaults.tau = 0.3;
    return b;
}

const std::vector<std::string>& benchmark_names() {
    static const std::vector<std::string> names{"example1", "example2", "example3"};
    return names;
}

Benchmark make_benchmark(const std::string& name, const ProblemOptions& opts) {
    if (name == "example1") return example1(opts);
    if (name == "example2") return example2(opts);
    if (name == "example3") return example3(opts);
    std::ostringstream msg;
    msg << "unknown problem '" << name << "'; valid names:";
    for (const auto& n : benchmark_names()) msg << ' ' << n;
    throw std::invalid_argument(msg.str());
}

ErrorReport error_report(const KktState& computed, const std::optional<ExactSolution>& exact, const FemSpace& space) {
    if (!exact) throw std::logic_error("error_report: problem has no exact solution");
    const Mesh& mesh = space.mesh();
    const std::size_t n = mesh.n_dof();

    std::optional<std::size_t> skip;
    if (exact->singular_point) {
        double best = inf;
        for (std::size_t i = 0; i < n; ++i) {
            const double dist = std::hypot(mesh.nodes()[i].x - exact->singular_point->x,
                                           mesh.nodes()[i].y - exact->singular_point->y);
            if (dist < best) {
                best = dist;
                skip = i;
            }
        }
    }
    const auto error = [&](const Field& computed_field, const PointFunction& fn, bool exclude) {
        Field diff(n);
        for (std::size_t i = 0; i < n; ++i) {
            diff[i] = (exclude && skip && *skip == i) ? 0.0 : computed_field[i] - fn(mesh.nodes()[i]);
        }
        return space.norm_l2(diff);
    };
    ErrorReport report;
    report.err_y = error(computed.y, exact->y, false);
    report.err_u = error(computed.u, exact->u, true);
    report.err_p = error(computed.p, exact->p, true);
    report.singular_excluded = skip.has_value();
    return report;
}

}  // namespace alcp
