#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"

namespace lenticolor {

enum class ResampleFilter { Nearest, Linear };

struct ExtractConfig {
    std::array<int, 3> channel_order = {0, 1, 2};  // left-to-right within a lenticule
    double boundary_margin = 0.1;                  // fraction of width excluded per edge
    int median_k = 3;                              // vertical median window, odd
    ResampleFilter resample_filter = ResampleFilter::Linear;
};

inline void validate_extract_config(const ExtractConfig& cfg) {
    if (cfg.boundary_margin < 0.0 || cfg.boundary_margin > 0.2)
        throw Error(ErrorCode::BadConfig, "boundary_margin must be in [0, 0.2]");
    if (cfg.median_k < 1 || cfg.median_k % 2 == 0)
        throw Error(ErrorCode::BadConfig, "median_k must be odd and >= 1");
    std::array<int, 3> sorted = cfg.channel_order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 3>{0, 1, 2})
        throw Error(ErrorCode::BadConfig, "channel_order must be a permutation of 0,1,2");
}

namespace detail {

// Mean of the scan over the continuous span [a, b) of row h, with pixel i
// covering [i-0.5, i+0.5). Partial pixels contribute by covered area.
inline double band_mean(const GrayRaster& scan, int h, double a, double b) {
    if (b <= a) return 0.0;
    int i0 = std::max(0, static_cast<int>(std::floor(a + 0.5)));
    int i1 = std::min(scan.width - 1, static_cast<int>(std::floor(b + 0.5)));
    double acc = 0.0, area = 0.0;
    for (int i = i0; i <= i1; ++i) {
        double overlap = std::min(b, i + 0.5) - std::max(a, i - 0.5);
        if (overlap > 0.0) {
            acc += overlap * scan.at(h, i);
            area += overlap;
        }
    }
    return (area > 0.0) ? acc / area : 0.0;
}

}  // namespace detail

// Splits every complete lenticule into its three color thirds and samples the
// centered core of each third: the margin (a fraction of the lenticule width)
// is trimmed from both sides of every band, which keeps the sample clear of
// the dark boundary lines and of the color junctions between bands. Each
// band's value is the area-weighted mean over its span.
inline StripeImage extract_stripes(const GrayRaster& scan, const LenticuleGrid& grid,
                                   const ExtractConfig& cfg = {}) {
    validate_extract_config(cfg);
    if (grid.image_height != scan.height || grid.image_width != scan.width)
        throw Error(ErrorCode::GridImageMismatch, "grid was fitted on different dims");
    const int M = grid.boundary_count();
    if (M < 2)
        throw Error(ErrorCode::GridImageMismatch, "grid has fewer than 2 boundaries");

    StripeImage out(scan.height, 3 * (M - 1));
    out.src_height = scan.height;
    out.src_width = scan.width;
    out.channel_order = cfg.channel_order;

    for (int h = 0; h < scan.height; ++h) {
        for (int m = 0; m + 1 < M; ++m) {
            double x0 = grid.x_at(m, h);
            double x1 = grid.x_at(m + 1, h);
            double w = x1 - x0;
            // Band half-width never collapses below a fifth of the third.
            double halfw = std::max(w / 6.0 - cfg.boundary_margin * w, w / 30.0);
            for (int j = 0; j < 3; ++j) {
                double center = x0 + (j + 0.5) * w / 3.0;
                double v = detail::band_mean(scan, h, center - halfw, center + halfw);
                out.at(h, 3 * m + j, cfg.channel_order[j]) = static_cast<float>(v);
            }
        }
    }
    return out;
}

// Per-column vertical median over the valid channel; edge rows use truncated
// windows.
inline StripeImage median_filter_vertical(const StripeImage& stripe, int k) {
    if (k < 1 || k % 2 == 0)
        throw Error(ErrorCode::BadConfig, "median window must be odd and >= 1");
    if (k == 1) return stripe;

    StripeImage out = stripe;
    const int r = k / 2;
    std::vector<float> window;
    window.reserve(k);
    for (int c = 0; c < stripe.width; ++c) {
        int ch = stripe.valid_channel(c);
        for (int h = 0; h < stripe.height; ++h) {
            int h0 = std::max(0, h - r);
            int h1 = std::min(stripe.height - 1, h + r);
            window.clear();
            for (int hh = h0; hh <= h1; ++hh) window.push_back(stripe.at(hh, c, ch));
            size_t mid = window.size() / 2;
            std::nth_element(window.begin(), window.begin() + mid, window.end());
            float med = window[mid];
            if (window.size() % 2 == 0) {
                float lower = *std::max_element(window.begin(), window.begin() + mid);
                med = 0.5f * (med + lower);
            }
            out.at(h, c, ch) = med;
        }
    }
    return out;
}

// Vertical resampling to the target aspect: H' = round(3 (M-1) H / W), with
// W and H the source scan dimensions.
inline StripeImage resample_vertical(const StripeImage& stripe,
                                     ResampleFilter filter = ResampleFilter::Linear) {
    const int H = stripe.height;
    const long long Hp = std::llround(3.0 * (stripe.width / 3) * static_cast<double>(stripe.src_height) /
                                      stripe.src_width);
    if (Hp < 8)
        throw Error(ErrorCode::DegenerateOutput, "resampled height below 8 rows");

    StripeImage out(static_cast<int>(Hp), stripe.width);
    out.src_height = stripe.src_height;
    out.src_width = stripe.src_width;
    out.channel_order = stripe.channel_order;

    const double scale = static_cast<double>(H) / Hp;
    for (int c = 0; c < stripe.width; ++c) {
        int ch = stripe.valid_channel(c);
        for (int j = 0; j < out.height; ++j) {
            double src = (j + 0.5) * scale - 0.5;
            float v;
            if (filter == ResampleFilter::Nearest) {
                int h = std::clamp(static_cast<int>(std::lround(src)), 0, H - 1);
                v = stripe.at(h, c, ch);
            } else {
                double clamped = std::clamp(src, 0.0, static_cast<double>(H - 1));
                int h0 = static_cast<int>(clamped);
                int h1 = std::min(h0 + 1, H - 1);
                double f = clamped - h0;
                v = static_cast<float>((1.0 - f) * stripe.at(h0, c, ch) +
                                       f * stripe.at(h1, c, ch));
            }
            out.at(j, c, ch) = v;
        }
    }
    return out;
}

}  // namespace lenticolor
