#pragma once

#include "alcp/alm.hpp"
#include "alcp/fem.hpp"
#include "alcp/pde.hpp"

#include <optional>
#include <string>
#include <vector>

namespace alcp {

/// Closed-form optimal solution attached to a manufactured benchmark.
struct ExactSolution {
    PointFunction y;
    PointFunction u;
    PointFunction p;
    PointFunction mu;  // empty when the multiplier is singular
    /// Point where u and p are unbounded; the nearest node is left out of
    /// their error norms.
    std::optional<Point> singular_point;
};

struct Benchmark {
    std::string name;
    ProblemData data;
    std::optional<ExactSolution> exact;
    AlConfig defaults;
};

struct ProblemOptions {
    std::size_t dof = 10000;
    std::optional<double> alpha;  // overrides the benchmark's α
};

/// Unit square, −Δy + y + eʸ = u, y ≤ 1, −100 ≤ u ≤ 200, α = 1e−5.
Benchmark example1(const ProblemOptions& opts = {});

/// Disk of radius 2, −Δy + y³ = u + f, y ≤ 1, −5 ≤ u ≤ 5, manufactured solution.
Benchmark example2(const ProblemOptions& opts = {});

/// [−1,2]², −Δy + y⁵ = u + f, radial state constraint touching at the origin,
/// no control bounds, Dirac multiplier.
Benchmark example3(const ProblemOptions& opts = {});

const std::vector<std::string>& benchmark_names();

/// Throws std::invalid_argument listing the valid names on an unknown name.
Benchmark make_benchmark(const std::string& name, const ProblemOptions& opts = {});

struct ErrorReport {
    double err_y = 0.0;
    double err_u = 0.0;
    double err_p = 0.0;
    bool singular_excluded = false;  // u/p errors omit the node nearest the singularity
};

/// Discrete L² errors against the nodal interpolant of the exact solution.
/// Throws std::logic_error when no exact solution is attached.
ErrorReport error_report(const KktState& computed, const std::optional<ExactSolution>& exact, const FemSpace& space);

namespace ex2 {
double y_bar(const Point& x);
double p_bar(const Point& x);
double mu_bar(const Point& x);
double laplacian_y_bar(const Point& x);
double laplacian_p_bar(const Point& x);
double u_bar(const Point& x, double alpha);
inline constexpr double default_alpha = 0.1;
}  // namespace ex2

namespace ex3 {
double y_bar(const Point& x, double alpha);
double u_bar(const Point& x, double alpha);
double p_bar(const Point& x, double alpha);
double psi(const Point& x, double alpha);
double y_d_tilde(const Point& x, double alpha);
double f_tilde(const Point& x);
}  // namespace ex3

}  // namespace alcp
