#include "alcp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace alcp {

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

std::vector<Edge> sorted_edges(const std::vector<Triangle>& triangles) {
    std::vector<Edge> edges;
    edges.reserve(3 * triangles.size());
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            std::size_t a = t[k];
            std::size_t b = t[(k + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
    const std::size_t n = nodes_.size();
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        for (std::size_t idx : triangles_[t]) {
            if (idx >= n) {
                throw std::invalid_argument("mesh: triangle " + std::to_string(t) +
                                            " references node out of range");
            }
        }
        if (!(triangle_area(t) > 0.0)) {
            throw std::invalid_argument("mesh: triangle " + std::to_string(t) +
                                        " is degenerate or clockwise");
        }
    }
    const auto edges = sorted_edges(triangles_);
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        if (j - i > 2) {
            throw std::invalid_argument("mesh: edge shared by more than two triangles");
        }
        i = j;
    }
    boundary_ = alcp::boundary_nodes(*this);
}

double Mesh::triangle_area(std::size_t t) const {
    const auto& tri = triangles_[t];
    return signed_area(nodes_[tri[0]], nodes_[tri[1]], nodes_[tri[2]]);
}

double Mesh::total_area() const {
    double sum = 0.0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) sum += triangle_area(t);
    return sum;
}

double Mesh::min_angle_degrees() const {
    double min_angle = 180.0;
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            const Point& p = nodes_[tri[k]];
            const Point& q = nodes_[tri[(k + 1) % 3]];
            const Point& r = nodes_[tri[(k + 2) % 3]];
            const double ux = q.x - p.x, uy = q.y - p.y;
            const double vx = r.x - p.x, vy = r.y - p.y;
            const double angle = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
            min_angle = std::min(min_angle, angle * 180.0 / std::numbers::pi);
        }
    }
    return min_angle;
}

double Mesh::max_edge_length() const {
    double h = 0.0;
    for (const auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) h = std::max(h, distance(nodes_[tri[k]], nodes_[tri[(k + 1) % 3]]));
    }
    return h;
}

std::vector<std::size_t> boundary_nodes(const Mesh& mesh) {
    const auto edges = sorted_edges(mesh.triangles());
    std::vector<std::size_t> result;
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        if (j - i == 1) {
            result.push_back(edges[i].first);
            result.push_back(edges[i].second);
        }
        i = j;
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

Mesh generate_rect_mesh(double x_min, double x_max, double y_min, double y_max, std::size_t nx,
                        std::size_t ny) {
    if (nx == 0 || ny == 0) throw std::invalid_argument("generate_rect_mesh: zero subdivision count");
    if (!(x_max > x_min) || !(y_max > y_min)) {
        throw std::invalid_argument("generate_rect_mesh: empty rectangle");
    }
    std::vector<Point> nodes;
    nodes.reserve((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j) {
        // Endpoints are hit exactly so the rectangle area is reproduced up to roundoff.
        const double y = (j == ny) ? y_max : y_min + (y_max - y_min) * double(j) / double(ny);
        for (std::size_t i = 0; i <= nx; ++i) {
            const double x = (i == nx) ? x_max : x_min + (x_max - x_min) * double(i) / double(nx);
            nodes.push_back({x, y});
        }
    }
    std::vector<Triangle> triangles;
    triangles.reserve(2 * nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t v00 = j * (nx + 1) + i;
            const std::size_t v10 = v00 + 1;
            const std::size_t v01 = v00 + (nx + 1);
            const std::size_t v11 = v01 + 1;
            triangles.push_back({v00, v10, v11});
            triangles.push_back({v00, v11, v01});
        }
    }
    return Mesh(std::move(nodes), std::move(triangles));
}

Mesh generate_disk_mesh(double radius, std::size_t n_rings) {
    if (!(radius > 0.0)) throw std::invalid_argument("generate_disk_mesh: radius must be positive");
    if (n_rings == 0) throw std::invalid_argument("generate_disk_mesh: n_rings must be >= 1");

    std::vector<Point> nodes{{0.0, 0.0}};
    std::vector<std::size_t> ring_start{0};
    std::vector<std::size_t> ring_size{1};
    for (std::size_t i = 1; i <= n_rings; ++i) {
        const double r = radius * double(i) / double(n_rings);
        const std::size_t m = 6 * i;
        ring_start.push_back(nodes.size());
        ring_size.push_back(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double theta = 2.0 * std::numbers::pi * double(k) / double(m);
            nodes.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }

    std::vector<Triangle> triangles;
    const auto outer_node = [&](std::size_t ring, std::size_t k) {
        return ring_start[ring] + (k % ring_size[ring]);
    };
    for (std::size_t k = 0; k < 6; ++k) triangles.push_back({0, outer_node(1, k), outer_node(1, k + 1)});

    for (std::size_t i = 2; i <= n_rings; ++i) {
        const std::size_t m_in = ring_size[i - 1];
        const std::size_t m_out = ring_size[i];
        std::size_t a = 0;
        std::size_t b = 0;
        // Merge the two rings by angle; fractions are compared in integers.
        while (a < m_in || b < m_out) {
            const bool advance_outer =
                (a == m_in) || (b < m_out && (b + 1) * m_in <= (a + 1) * m_out);
            if (advance_outer) {
                triangles.push_back({outer_node(i - 1, a), outer_node(i, b), outer_node(i, b + 1)});
                ++b;
            } else {
                triangles.push_back({outer_node(i - 1, a), outer_node(i, b), outer_node(i - 1, a + 1)});
                ++a;
            }
        }
    }
    return Mesh(std::move(nodes), std::move(triangles));
}

std::size_t rect_subdivisions_for_dof(std::size_t dof_target, std::size_t exclude_multiples_of) {
    if (dof_target < 4) throw std::invalid_argument("rect_subdivisions_for_dof: target too small");
    const auto n0 = static_cast<std::size_t>(std::llround(std::sqrt(double(dof_target)))) - 1;
    std::size_t best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t n = (n0 > 3 ? n0 - 3 : 1); n <= n0 + 3; ++n) {
        if (exclude_multiples_of != 0 && n % exclude_multiples_of == 0) continue;
        const double gap = std::abs(double((n + 1) * (n + 1)) - double(dof_target));
        if (gap < best_gap) {
            best_gap = gap;
            best = n;
        }
    }
    return best;
}

std::size_t disk_rings_for_dof(std::size_t dof_target) {
    std::size_t best = 1;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1;; ++n) {
        const double count = 1.0 + 3.0 * double(n) * double(n + 1);
        const double gap = std::abs(count - double(dof_target));
        if (gap < best_gap) {
            best_gap = gap;
            best = n;
        }
        if (count > double(dof_target)) break;
    }
    return best;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
    const auto old_precision = os.precision(17);
    os << mesh.n_dof() << '\n';
    for (const auto& p : mesh.nodes()) os << p.x << ' ' << p.y << '\n';
    os << mesh.n_triangles() << '\n';
    for (const auto& t : mesh.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os.precision(old_precision);
}

Mesh read_mesh(std::istream& is) {
    std::size_t n = 0;
    if (!(is >> n)) throw std::runtime_error("read_mesh: missing node count");
    std::vector<Point> nodes(n);
    for (auto& p : nodes) {
        if (!(is >> p.x >> p.y)) throw std::runtime_error("read_mesh: truncated node list");
    }
    std::size_t m = 0;
    if (!(is >> m)) throw std::runtime_error("read_mesh: missing triangle count");
    std::vector<Triangle> triangles(m);
    for (auto& t : triangles) {
        if (!(is >> t[0] >> t[1] >> t[2])) throw std::runtime_error("read_mesh: truncated triangle list");
    }
    return Mesh(std::move(nodes), std::move(triangles));
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_mesh(os, mesh);
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_mesh(is);
}

}  // namespace alcp
