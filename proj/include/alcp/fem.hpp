#pragma once

#include "alcp/linalg.hpp"
#include "alcp/mesh.hpp"

#include <functional>
#include <memory>
#include <span>

namespace alcp {

/// Nodal coefficient vector of a P1 function.
using Field = Vec;

using PointFunction = std::function<double(const Point&)>;

/// M_ij = ∫ φ_i φ_j, exact element integration.
SparseMatrix assemble_mass(const Mesh& mesh);

/// Row sums of the mass matrix, D_i = ∫ φ_i.
Vec assemble_lumped_mass(const Mesh& mesh);

/// K_ij = ∫ ∇φ_i·∇φ_j + ∫ a₀ φ_i φ_j with a₀ taken as a P1 field and the
/// zero-order term integrated by the edge-midpoint rule. No boundary rows
/// are modified (homogeneous Neumann data).
SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> a0);

/// Nodal interpolant; throws std::invalid_argument on a non-finite value.
Field interpolate(const PointFunction& func, const Mesh& mesh);

Field positive_part(std::span<const double> f);

/// Mesh together with its assembled mass and lumped mass. All discrete norms
/// and inner products go through here.
class FemSpace {
public:
    explicit FemSpace(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    std::size_t n_dof() const { return mesh_->n_dof(); }
    const SparseMatrix& mass() const { return mass_; }
    const Vec& lumped() const { return lumped_; }

    /// (f, g) = fᵀ M g
    double inner_l2(std::span<const double> f, std::span<const double> g) const;
    /// (f, g)_D = Σ D_i f_i g_i
    double inner_lumped(std::span<const double> f, std::span<const double> g) const;

    double norm_l2(std::span<const double> f) const;
    double norm_lumped(std::span<const double> f) const;
    double norm_l1(std::span<const double> f) const;
    static double norm_cbar(std::span<const double> f) { return norm_inf(f); }

    Field interpolate(const PointFunction& func) const { return alcp::interpolate(func, *mesh_); }

private:
    std::shared_ptr<const Mesh> mesh_;
    SparseMatrix mass_;
    Vec lumped_;
};

}  // namespace alcp
