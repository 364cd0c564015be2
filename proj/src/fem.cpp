#include "alcp/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alcp {

namespace {

struct P1Element {
    std::array<std::size_t, 3> v;
    double area;
    // Gradients of the three barycentric basis functions.
    std::array<std::array<double, 2>, 3> grad;
};

P1Element make_element(const Mesh& mesh, std::size_t t) {
    const auto& tri = mesh.triangles()[t];
    const auto& p = mesh.nodes();
    const Point& a = p[tri[0]];
    const Point& b = p[tri[1]];
    const Point& c = p[tri[2]];
    P1Element e{tri, mesh.triangle_area(t), {}};
    const double inv = 1.0 / (2.0 * e.area);
    e.grad[0] = {(b.y - c.y) * inv, (c.x - b.x) * inv};
    e.grad[1] = {(c.y - a.y) * inv, (a.x - c.x) * inv};
    e.grad[2] = {(a.y - b.y) * inv, (b.x - a.x) * inv};
    return e;
}

}  // namespace

SparseMatrix assemble_mass(const Mesh& mesh) {
    std::vector<Triplet> t;
    t.reserve(9 * mesh.n_triangles());
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto& tri = mesh.triangles()[k];
        const double area = mesh.triangle_area(k);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) t.push_back({tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0)});
        }
    }
    return assemble_from_triplets(t, mesh.n_dof(), mesh.n_dof());
}

Vec assemble_lumped_mass(const Mesh& mesh) {
    Vec d(mesh.n_dof(), 0.0);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const double third = mesh.triangle_area(k) / 3.0;
        for (std::size_t v : mesh.triangles()[k]) d[v] += third;
    }
    return d;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> a0) {
    if (a0.size() != mesh.n_dof()) throw std::invalid_argument("assemble_stiffness: a0 size mismatch");
    for (double v : a0) {
        if (!(v >= 0.0)) throw std::invalid_argument("assemble_stiffness: a0 must be nonnegative");
    }
    std::vector<Triplet> t;
    t.reserve(9 * mesh.n_triangles());
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const P1Element e = make_element(mesh, k);
        // Edge midpoint m_ij (i<j): φ_i = φ_j = 1/2, the third basis function vanishes.
        std::array<std::array<double, 3>, 3> reaction{};
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const double a_mid = 0.5 * (a0[e.v[i]] + a0[e.v[j]]);
                const double w = e.area / 3.0 * a_mid * 0.25;
                reaction[i][i] += w;
                reaction[j][j] += w;
                reaction[i][j] += w;
                reaction[j][i] += w;
            }
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double diffusion =
                    e.area * (e.grad[i][0] * e.grad[j][0] + e.grad[i][1] * e.grad[j][1]);
                t.push_back({e.v[i], e.v[j], diffusion + reaction[i][j]});
            }
        }
    }
    return assemble_from_triplets(t, mesh.n_dof(), mesh.n_dof());
}

Field interpolate(const PointFunction& func, const Mesh& mesh) {
    Field f(mesh.n_dof());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = func(mesh.nodes()[i]);
        if (!std::isfinite(f[i])) {
            throw std::invalid_argument("interpolate: non-finite value at node " + std::to_string(i));
        }
    }
    return f;
}

Field positive_part(std::span<const double> f) {
    Field out(f.size());
    std::transform(f.begin(), f.end(), out.begin(), [](double v) { return std::max(0.0, v); });
    return out;
}

FemSpace::FemSpace(std::shared_ptr<const Mesh> mesh)
    : mesh_(std::move(mesh)), mass_(assemble_mass(*mesh_)), lumped_(assemble_lumped_mass(*mesh_)) {}

double FemSpace::inner_l2(std::span<const double> f, std::span<const double> g) const {
    return dot(f, spmv(mass_, g));
}

double FemSpace::inner_lumped(std::span<const double> f, std::span<const double> g) const {
    if (f.size() != lumped_.size() || g.size() != lumped_.size()) {
        throw std::invalid_argument("inner_lumped: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += lumped_[i] * f[i] * g[i];
    return s;
}

double FemSpace::norm_l2(std::span<const double> f) const { return std::sqrt(std::max(0.0, inner_l2(f, f))); }

double FemSpace::norm_lumped(std::span<const double> f) const { return std::sqrt(inner_lumped(f, f)); }

double FemSpace::norm_l1(std::span<const double> f) const {
    if (f.size() != lumped_.size()) throw std::invalid_argument("norm_l1: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += lumped_[i] * std::abs(f[i]);
    return s;
}

}  // namespace alcp
