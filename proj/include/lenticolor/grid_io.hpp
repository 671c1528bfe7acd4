#pragma once

// LGRID plain-text grid format:
//   header line "LGRID M H W"
//   M lines "t_m b_m", 6 decimal places

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"

namespace lenticolor {

inline void write_grid(const std::string& path, const LenticuleGrid& g) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path);
    os << "LGRID " << g.boundary_count() << " " << g.image_height << " " << g.image_width << "\n";
    char line[64];
    for (int m = 0; m < g.boundary_count(); ++m) {
        std::snprintf(line, sizeof(line), "%.6f %.6f\n", g.t[m], g.b[m]);
        os << line;
    }
    if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

inline LenticuleGrid read_grid(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot open: " + path);
    std::string tag;
    int m = 0;
    LenticuleGrid g;
    is >> tag >> m >> g.image_height >> g.image_width;
    if (!is || tag != "LGRID")
        throw Error(ErrorCode::BadMagic, "not an LGRID file: " + path);
    g.t.resize(m);
    g.b.resize(m);
    for (int i = 0; i < m; ++i) {
        is >> g.t[i] >> g.b[i];
    }
    if (!is) throw Error(ErrorCode::IoFailure, "truncated LGRID file: " + path);
    validate_grid(g);
    return g;
}

}  // namespace lenticolor
