#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace alcp {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;

/// Conforming triangle mesh. Triangles are stored counterclockwise; the
/// boundary node list is derived from the connectivity and kept sorted.
class Mesh {
public:
    Mesh() = default;

    /// Validates orientation, index ranges and conformity, then derives the
    /// boundary nodes. Throws std::invalid_argument on a malformed mesh.
    Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles);

    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }
    std::size_t n_dof() const { return nodes_.size(); }
    std::size_t n_triangles() const { return triangles_.size(); }

    double triangle_area(std::size_t t) const;
    double total_area() const;

    /// Smallest interior angle over all triangles, in degrees.
    double min_angle_degrees() const;

    /// Longest edge length.
    double max_edge_length() const;

private:
    std::vector<Point> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<std::size_t> boundary_;
};

double signed_area(const Point& a, const Point& b, const Point& c);

/// Structured (nx × ny)-cell grid on [x_min,x_max]×[y_min,y_max]; every cell
/// is split along the diagonal from its lower-left to its upper-right corner.
Mesh generate_rect_mesh(double x_min, double x_max, double y_min, double y_max,
                        std::size_t nx, std::size_t ny);

/// Center node plus n_rings concentric rings; ring i carries 6i nodes.
Mesh generate_disk_mesh(double radius, std::size_t n_rings);

/// Endpoints of edges that belong to exactly one triangle, sorted.
std::vector<std::size_t> boundary_nodes(const Mesh& mesh);

/// Rectangle subdivision count n (n×n cells) whose node count (n+1)² is
/// closest to dof_target. When exclude_multiples_of is nonzero, counts that
/// are multiples of it are skipped.
std::size_t rect_subdivisions_for_dof(std::size_t dof_target, std::size_t exclude_multiples_of = 0);

/// Ring count whose disk-mesh node count 1 + 3n(n+1) is closest to dof_target.
std::size_t disk_rings_for_dof(std::size_t dof_target);

// Plain-text format: "N", N lines "x y", "M", M lines "i j k" (0-based).
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh_file(const std::string& path);

}  // namespace alcp
