#pragma once

// CSV emission and ingestion for sampled functions. Numbers use the shortest
// representation that parses back to the same double.

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mellin_numerics.hpp"

namespace corner::io {

inline std::string format_double(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw DomainError("csv: cannot parse number '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline void write_row(std::ostream& os, double a, double b, cplx v) {
    os << format_double(a) << ',' << format_double(b) << ',' << format_double(v.real()) << ','
       << format_double(v.imag()) << '\n';
}

/// Header `t,theta,value_re,value_im`, one row per tensor node, t outermost.
inline void write_radial_csv(std::ostream& os, const RadialFunction& v) {
    os << "t,theta,value_re,value_im\n";
    const auto& tg = v.t_grid();
    const auto& g = v.angular();
    for (int k = 0; k < tg.nodes; ++k)
        for (int i = 0; i < g.size(); ++i) write_row(os, tg.t(k), g.node(i), v.values()(k, i));
}

/// Header `eta,theta,value_re,value_im`, one row per (eta, theta) node.
inline void write_line_csv(std::ostream& os, const MellinLineData& d) {
    os << "eta,theta,value_re,value_im\n";
    for (int j = 0; j < d.eta.nodes; ++j)
        for (int i = 0; i < d.angular->size(); ++i) write_row(os, d.eta.eta(j), d.angular->node(i), d.values(j, i));
}

/// Reads a CSV written by write_radial_csv. The angular grid is rebuilt from
/// omega, the panel count and the number of theta values per t.
inline RadialFunction read_radial_csv(std::istream& is, double omega, int panels_per_sector = 4) {
    std::string line;
    if (!std::getline(is, line) || line != "t,theta,value_re,value_im")
        throw DomainError("csv: expected header t,theta,value_re,value_im");
    std::vector<std::array<double, 4>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 4) throw DomainError("csv: expected four fields per row");
        rows.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3])});
    }
    if (rows.empty()) throw DomainError("csv: no data rows");
    std::size_t per_t = 0;
    while (per_t < rows.size() && rows[per_t][0] == rows[0][0]) ++per_t;
    if (per_t % 2 != 0 || rows.size() % per_t != 0)
        throw DomainError("csv: rows do not form a tensor grid with two equal sectors");
    const int n_t = static_cast<int>(rows.size() / per_t);
    auto angular = std::make_shared<const AngularGrid>(omega, static_cast<int>(per_t / 2), panels_per_sector);
    const RadialGrid tg(rows.front()[0], rows.back()[0], n_t);
    Matrix values(n_t, static_cast<Eigen::Index>(per_t));
    const double t_tol = 1e-9 * tg.step();
    for (int k = 0; k < n_t; ++k) {
        for (std::size_t i = 0; i < per_t; ++i) {
            const auto& r = rows[k * per_t + i];
            if (std::abs(r[0] - tg.t(k)) > t_tol) throw DomainError("csv: t values are not uniformly spaced");
            if (std::abs(r[1] - angular->node(static_cast<int>(i))) > 1e-12)
                throw DomainError("csv: theta values do not match the angular grid for this omega and panel count");
            values(k, static_cast<Eigen::Index>(i)) = cplx(r[2], r[3]);
        }
    }
    return RadialFunction(tg, std::move(angular), std::move(values));
}

}  // namespace corner::io
