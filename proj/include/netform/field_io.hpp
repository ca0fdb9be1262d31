#pragma once

// CSV serialization of fields.  Layout: header `x[,y],value...`, one node per
// row in storage order (x fastest), doubles printed with %.17g so that a
// write/read round trip is exact and repeated runs are byte-identical.

#include "netform/grid.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace netform {

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_field_csv(const std::string& path, const Grid& g,
                            const Eigen::Ref<const Eigen::ArrayXXd>& values,
                            const std::vector<std::string>& value_names) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << (g.dim() == 1 ? "x" : "x,y");
    for (const auto& n : value_names) out << ',' << n;
    out << '\n';
    const int nx = g.nodes(0);
    const int ny = g.dim() == 2 ? g.nodes(1) : 1;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            out << format_double(g.coord(0, i));
            if (g.dim() == 2) out << ',' << format_double(g.coord(1, j));
            const Eigen::Index k = g.dim() == 1 ? g.index(i) : g.index(i, j);
            for (Eigen::Index c = 0; c < values.cols(); ++c)
                out << ',' << format_double(values(k, c));
            out << '\n';
        }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline Eigen::ArrayXXd read_field_csv(const std::string& path, const Grid& g,
                                      int expected_components) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
    const int coord_cols = g.dim();
    Eigen::ArrayXXd values(g.total_nodes(), expected_components);
    Eigen::Index row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= g.total_nodes())
            throw std::runtime_error("CSV has more rows than grid nodes: " + path);
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= coord_cols) {
                const int c = col - coord_cols;
                if (c >= expected_components)
                    throw std::runtime_error("CSV has more value columns than expected: " + path);
                values(row, c) = std::stod(cell);
            }
            ++col;
        }
        if (col != coord_cols + expected_components)
            throw std::runtime_error("CSV row has wrong column count: " + path);
        ++row;
    }
    if (row != g.total_nodes())
        throw std::runtime_error("CSV has fewer rows than grid nodes: " + path);
    return values;
}

} // namespace detail

inline void write_csv(const std::string& path, const ScalarField& f) {
    detail::write_field_csv(path, f.grid, f.values, {"value"});
}

inline void write_csv(const std::string& path, const VectorField& f) {
    std::vector<std::string> names;
    for (int c = 0; c < f.components(); ++c) names.push_back("value" + std::to_string(c));
    detail::write_field_csv(path, f.grid, f.values, names);
}

inline ScalarField read_scalar_csv(const std::string& path, const Grid& g) {
    return ScalarField(g, detail::read_field_csv(path, g, 1).col(0));
}

inline VectorField read_vector_csv(const std::string& path, const Grid& g) {
    return VectorField(g, detail::read_field_csv(path, g, g.dim()));
}

} // namespace netform
