#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "lenticolor/error.hpp"

namespace lenticolor {

// Single-channel row-major float plane. GrayRaster and LikelihoodMap share
// this layout; they differ only in provenance and validation context.
struct Plane {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // row-major, height*width

    Plane() = default;
    Plane(int h, int w, float fill = 0.0f)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

    float& at(int h, int w) { return data[static_cast<size_t>(h) * width + w]; }
    float at(int h, int w) const { return data[static_cast<size_t>(h) * width + w]; }

    bool same_dims(const Plane& o) const { return height == o.height && width == o.width; }
};

struct GrayRaster : Plane {
    using Plane::Plane;
};

struct LikelihoodMap : Plane {
    using Plane::Plane;
};

// Interleaved 3-channel row-major float image.
struct RGBRaster {
    int height = 0;
    int width = 0;
    std::vector<float> data;  // height*width*3, channel-interleaved

    RGBRaster() = default;
    RGBRaster(int h, int w, float fill = 0.0f)
        : height(h), width(w), data(static_cast<size_t>(h) * w * 3, fill) {}

    float& at(int h, int w, int c) { return data[(static_cast<size_t>(h) * width + w) * 3 + c]; }
    float at(int h, int w, int c) const { return data[(static_cast<size_t>(h) * width + w) * 3 + c]; }
};

// Striped intermediate: width = 3*(M-1) columns, exactly one valid channel per
// column. Column c holds channel channel_order[c % 3]. src_width/src_height
// remember the scan this was extracted from (needed for the vertical resample
// target height).
struct StripeImage {
    int height = 0;
    int width = 0;  // 3*(M-1)
    int src_height = 0;
    int src_width = 0;
    std::array<int, 3> channel_order = {0, 1, 2};
    std::vector<float> data;  // height*width*3, invalid entries zero

    StripeImage() = default;
    StripeImage(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w * 3, 0.0f) {}

    float& at(int h, int w, int c) { return data[(static_cast<size_t>(h) * width + w) * 3 + c]; }
    float at(int h, int w, int c) const { return data[(static_cast<size_t>(h) * width + w) * 3 + c]; }

    // Channel carried by column c.
    int valid_channel(int c) const { return channel_order[c % 3]; }
    float valid_at(int h, int c) const { return at(h, c, valid_channel(c)); }
};

// Per-pixel, per-channel interpolation weights: 6 weights for each of the 3
// channels, row-major over pixels. Held in double so the post-load
// renormalization lands on sum 1 to well below 1e-9; the file format stores
// float32.
struct CoeffTensor {
    static constexpr int kInner = 18;  // 3 channels * 6 weights

    int height = 0;
    int width = 0;
    std::vector<double> data;  // height*width*18

    CoeffTensor() = default;
    CoeffTensor(int h, int w)
        : height(h), width(w), data(static_cast<size_t>(h) * w * kInner, 0.0) {}

    double& at(int h, int w, int c, int k) {
        return data[(static_cast<size_t>(h) * width + w) * kInner + c * 6 + k];
    }
    double at(int h, int w, int c, int k) const {
        return data[(static_cast<size_t>(h) * width + w) * kInner + c * 6 + k];
    }
};

// Vectorized lenticule boundaries: absolute fractional x-positions of each of
// the M boundaries at the top row (t) and the bottom row (b).
struct LenticuleGrid {
    std::vector<double> t;
    std::vector<double> b;
    int image_height = 0;
    int image_width = 0;

    int boundary_count() const { return static_cast<int>(t.size()); }

    // Boundary m's x-position at row h; h=0 is the top row.
    double x_at(int m, int h) const {
        double s = (image_height > 1) ? static_cast<double>(h) / (image_height - 1) : 0.0;
        return t[m] + s * (b[m] - t[m]);
    }
};

constexpr double kMaxTiltDegrees = 2.0;

inline void validate_grid(const LenticuleGrid& g) {
    const size_t m = g.t.size();
    if (m != g.b.size())
        throw Error(ErrorCode::DimensionMismatch, "t and b lengths differ");
    const double max_shear = g.image_height * std::tan(kMaxTiltDegrees * M_PI / 180.0);
    for (size_t i = 0; i < m; ++i) {
        if (g.t[i] < 0.0 || g.t[i] > g.image_width - 1 || g.b[i] < 0.0 || g.b[i] > g.image_width - 1)
            throw Error(ErrorCode::RangeViolation, "boundary position outside [0, W-1]");
        if (std::abs(g.t[i] - g.b[i]) > max_shear)
            throw Error(ErrorCode::RangeViolation, "boundary tilt exceeds sanity bound");
        if (i + 1 < m && (g.t[i + 1] <= g.t[i] || g.b[i + 1] <= g.b[i]))
            throw Error(ErrorCode::IllPosedFit, "boundary positions not strictly increasing");
    }
}

inline void validate_range01(const Plane& p, const char* what) {
    for (float v : p.data) {
        if (!std::isfinite(v))
            throw Error(ErrorCode::NonFiniteValue, what);
        if (v < 0.0f || v > 1.0f)
            throw Error(ErrorCode::RangeViolation, what);
    }
}

// Bilinear resize of an RGB image, used to bring pipeline output back to
// source dimensions for comparison.
inline RGBRaster resize_bilinear(const RGBRaster& src, int out_h, int out_w) {
    RGBRaster out(out_h, out_w);
    const double sy = static_cast<double>(src.height) / out_h;
    const double sx = static_cast<double>(src.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int ya = std::clamp(y0, 0, src.height - 1);
        int yb = std::clamp(y0 + 1, 0, src.height - 1);
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int xa = std::clamp(x0, 0, src.width - 1);
            int xb = std::clamp(x0 + 1, 0, src.width - 1);
            for (int c = 0; c < 3; ++c) {
                double v = (1 - wy) * ((1 - wx) * src.at(ya, xa, c) + wx * src.at(ya, xb, c)) +
                           wy * ((1 - wx) * src.at(yb, xa, c) + wx * src.at(yb, xb, c));
                out.at(y, x, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace lenticolor
