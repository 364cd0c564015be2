#include "alcp/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace alcp {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<NamedField>& fields) {
    os << "# vtk DataFile Version 3.0\n";
    os << "alcp fields\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.n_dof() << " double\n";
    for (const auto& p : mesh.nodes()) os << format_number(p.x) << ' ' << format_number(p.y) << " 0\n";
    os << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
    for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.n_triangles() << '\n';
    for (std::size_t i = 0; i < mesh.n_triangles(); ++i) os << "5\n";
    if (fields.empty()) return;
    os << "POINT_DATA " << mesh.n_dof() << '\n';
    for (const auto& [name, field] : fields) {
        if (field->size() != mesh.n_dof()) throw std::invalid_argument("write_vtk: field size mismatch for " + name);
        os << "SCALARS " << name << " double 1\n";
        os << "LOOKUP_TABLE default\n";
        for (double v : *field) os << format_number(v) << '\n';
    }
}

void write_field_csv(std::ostream& os, const Mesh& mesh, const Field& field) {
    if (field.size() != mesh.n_dof()) throw std::invalid_argument("write_field_csv: field size mismatch");
    os << "node_index,x,y,value\r\n";
    for (std::size_t i = 0; i < field.size(); ++i) {
        os << i << ',' << format_number(mesh.nodes()[i].x) << ',' << format_number(mesh.nodes()[i].y) << ','
           << format_number(field[i]) << "\r\n";
    }
}

Field read_field_csv(std::istream& is, std::size_t expected_size) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_field_csv: empty input");
    Field out(expected_size, 0.0);
    std::vector<bool> seen(expected_size, false);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 4) throw std::runtime_error("read_field_csv: expected 4 columns");
        const std::size_t idx = std::stoul(cells[0]);
        if (idx >= expected_size) throw std::runtime_error("read_field_csv: node index out of range");
        out[idx] = std::stod(cells[3]);
        seen[idx] = true;
    }
    for (bool s : seen) {
        if (!s) throw std::runtime_error("read_field_csv: missing nodes");
    }
    return out;
}

void write_report_csv(std::ostream& os, const AlReport& report) {
    const auto& cols = report_csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\r\n";
    for (const auto& r : report.records) {
        os << r.k << ',' << r.n << ',' << format_number(r.rho) << ',' << format_number(r.R) << ','
           << (r.successful ? 1 : 0) << ',' << r.inner_iters << ',' << format_number(r.mu_l1) << ','
           << format_number(r.f) << ',' << format_number(r.f_al) << ',' << format_number(r.max_violation) << ','
           << format_number(r.complementarity) << "\r\n";
    }
}

}  // namespace alcp
