#pragma once

#include "alcp/alm.hpp"
#include "alcp/mesh.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace alcp {

/// Shortest round-tripping decimal representation ("%.17g"), '.' separator.
std::string format_number(double v);

using NamedField = std::pair<std::string, const Field*>;

/// Legacy ASCII VTK, UNSTRUCTURED_GRID with one POINT_DATA scalar per field.
void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<NamedField>& fields);

/// CSV with header node_index,x,y,value.
void write_field_csv(std::ostream& os, const Mesh& mesh, const Field& field);
Field read_field_csv(std::istream& is, std::size_t expected_size);

inline const std::vector<std::string>& report_csv_columns() {
    static const std::vector<std::string> cols{"k", "n", "rho", "R_k", "successful", "inner_iters", "mu_l1",
                                               "f", "f_al", "max_violation", "complementarity"};
    return cols;
}

/// One row per outer step.
void write_report_csv(std::ostream& os, const AlReport& report);

}  // namespace alcp
