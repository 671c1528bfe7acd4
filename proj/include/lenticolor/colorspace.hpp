#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"

namespace lenticolor {

struct ColorMatrix {
    std::array<double, 9> m = {1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major

    double& at(int r, int c) { return m[r * 3 + c]; }
    double at(int r, int c) const { return m[r * 3 + c]; }

    std::array<double, 3> apply(const std::array<double, 3>& v) const {
        return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
                m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
                m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
    }

    ColorMatrix operator*(const ColorMatrix& o) const {
        ColorMatrix r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k) acc += at(i, k) * o.at(k, j);
                r.at(i, j) = acc;
            }
        return r;
    }

    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    ColorMatrix inverse() const {
        double d = det();
        if (std::abs(d) < 1e-12)
            throw Error(ErrorCode::SingularMatrix, "matrix not invertible");
        ColorMatrix r;
        r.m = {(m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
               (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
               (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
               (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
               (m[0] * m[4] - m[1] * m[3]) / d};
        return r;
    }
};

struct Whitepoint {
    std::array<double, 3> xyz;
};

// Lenticular RGB -> Adobe RGB (1998) conversion shipped as the default.
inline ColorMatrix lenticular_to_adobe_matrix() {
    ColorMatrix m;
    m.m = {0.789, 0.154, 0.057, -0.286, 1.195, 0.06, -0.049, 0.035, 1.035};
    return m;
}

inline Whitepoint lenticular_whitepoint() { return {{0.991, 1.0, 1.315}}; }

inline Whitepoint d65_whitepoint() { return {{0.9505, 1.0, 1.0891}}; }

// CIECAM02 XYZ -> LMS cone-response matrix.
inline ColorMatrix cat02_forward() {
    ColorMatrix m;
    m.m = {0.7328, 0.4296, -0.1624, -0.7036, 1.6975, 0.0061, 0.0030, 0.0136, 0.9834};
    return m;
}

// Adobe RGB (1998) XYZ -> RGB matrix (D65 reference white, linear light).
inline ColorMatrix adobe_xyz_to_rgb() {
    ColorMatrix m;
    m.m = {2.04159, -0.56501, -0.34473, -0.96924, 1.87597, 0.04156, 0.01344, -0.11836, 1.01517};
    return m;
}

// Per-pixel linear map; clamps to [0,1] when requested and reports how many
// component values were clipped.
inline RGBRaster apply_matrix(const RGBRaster& img, const ColorMatrix& m, bool clamp,
                              size_t* clipped_count = nullptr) {
    RGBRaster out(img.height, img.width);
    size_t clipped = 0;
    for (int h = 0; h < img.height; ++h) {
        for (int w = 0; w < img.width; ++w) {
            std::array<double, 3> v = {img.at(h, w, 0), img.at(h, w, 1), img.at(h, w, 2)};
            std::array<double, 3> r = m.apply(v);
            for (int c = 0; c < 3; ++c) {
                double y = r[c];
                if (clamp) {
                    double cl = std::clamp(y, 0.0, 1.0);
                    if (cl != y) ++clipped;
                    y = cl;
                }
                out.at(h, w, c) = static_cast<float>(y);
            }
        }
    }
    if (clipped_count) *clipped_count = clipped;
    return out;
}

// Scaling factors of the von Kries adaptation: element-wise ratio of the
// destination and source whitepoint cone responses.
inline std::array<double, 3> cat_scale(const Whitepoint& source, const Whitepoint& destination,
                                       const ColorMatrix& lms_fwd = cat02_forward()) {
    auto src = lms_fwd.apply(source.xyz);
    auto dst = lms_fwd.apply(destination.xyz);
    for (double v : src)
        if (std::abs(v) < 1e-12)
            throw Error(ErrorCode::SingularMatrix, "degenerate whitepoint cone response");
    return {dst[0] / src[0], dst[1] / src[1], dst[2] / src[2]};
}

// Composes the five-step chromatic adaptation pipeline:
// step_e * lms_inv * diag(scale) * lms_fwd * step_a.
inline ColorMatrix compose_cat(const ColorMatrix& step_a, const ColorMatrix& lms_fwd,
                               const std::array<double, 3>& scale, const ColorMatrix& lms_inv,
                               const ColorMatrix& step_e) {
    for (const ColorMatrix* m : {&step_a, &lms_fwd, &lms_inv, &step_e})
        if (std::abs(m->det()) < 1e-12)
            throw Error(ErrorCode::SingularMatrix, "singular step matrix");
    ColorMatrix diag;
    diag.m = {scale[0], 0, 0, 0, scale[1], 0, 0, 0, scale[2]};
    return step_e * lms_inv * diag * lms_fwd * step_a;
}

// Destination-space transfer encoding, applied last when requested. Adobe RGB
// (1998) specifies gamma 563/256.
inline RGBRaster apply_gamma(const RGBRaster& img, double gamma = 563.0 / 256.0) {
    RGBRaster out(img.height, img.width);
    for (size_t i = 0; i < img.data.size(); ++i) {
        float v = std::max(img.data[i], 0.0f);
        out.data[i] = static_cast<float>(std::pow(v, 1.0 / gamma));
    }
    return out;
}

// Plain-text 3x3 matrix files: 3 lines of 3 numbers.
inline ColorMatrix read_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot open: " + path);
    ColorMatrix m;
    for (int i = 0; i < 9; ++i)
        if (!(is >> m.m[i]))
            throw Error(ErrorCode::IoFailure, "malformed matrix file: " + path);
    return m;
}

inline void write_matrix(const std::string& path, const ColorMatrix& m) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open for writing: " + path);
    os.precision(17);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) os << m.at(r, c) << (c == 2 ? '\n' : ' ');
    }
    if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

}  // namespace lenticolor
