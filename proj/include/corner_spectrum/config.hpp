#pragma once

// Numerical defaults shared by the library front ends. Values can be
// overridden by a key=value file; lines starting with '#' are ignored.

#include <cstdlib>
#include <fstream>
#include <map>
#include <string>

#include "errors.hpp"

namespace corner {

struct Settings {
    double t_min = -12.0;
    double t_max = 6.0;
    int grid_t = 4096;
    double eta_max = 128.0;
    int grid_eta = 4096;
    int grid_theta = 64;
    int panels = 4;
    int contour_nodes = 64;
    double radius_tolerance = 1e-6;
    double root_tolerance = 1e-9;
    int profile_nodes = 512;

    void set(const std::string& key, const std::string& value) {
        auto as_double = [&] {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(value, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != value.size()) throw DomainError("config: '" + key + "' needs a number, got '" + value + "'");
            return v;
        };
        auto as_int = [&] {
            const double v = as_double();
            if (v != static_cast<int>(v)) throw DomainError("config: '" + key + "' needs an integer");
            return static_cast<int>(v);
        };
        if (key == "t_min") t_min = as_double();
        else if (key == "t_max") t_max = as_double();
        else if (key == "grid_t") grid_t = as_int();
        else if (key == "eta_max") eta_max = as_double();
        else if (key == "grid_eta") grid_eta = as_int();
        else if (key == "grid_theta") grid_theta = as_int();
        else if (key == "panels") panels = as_int();
        else if (key == "contour_nodes") contour_nodes = as_int();
        else if (key == "radius_tolerance") radius_tolerance = as_double();
        else if (key == "root_tolerance") root_tolerance = as_double();
        else if (key == "profile_nodes") profile_nodes = as_int();
        else throw DomainError("config: unknown key '" + key + "'");
    }

    void load(std::istream& is) {
        std::string line;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        while (std::getline(is, line)) {
            line = trim(line);
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw DomainError("config: expected key=value, got '" + line + "'");
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DomainError("config: cannot open '" + path + "'");
        load(in);
    }

    /// Defaults, then the file named by CORNER_SPECTRUM_CONFIG when set.
    static Settings from_environment() {
        Settings s;
        if (const char* p = std::getenv("CORNER_SPECTRUM_CONFIG"); p && *p) s.load_file(p);
        return s;
    }
};

}  // namespace corner
