#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"

namespace lenticolor {

struct SimParams {
    double mean_width = 16.0;         // px
    double width_mod_amplitude = 0.05;
    double width_mod_period = 40.0;   // lenticules
    double tilt_degrees = 0.5;
    double boundary_width = 1.0;      // px, Gaussian FWHM-ish scale
    double boundary_depth = 0.6;      // attenuation at the line center
    double noise_sigma = 0.01;
    double gain_jitter = 0.0;         // gain drawn from 1 +- gain_jitter
    double offset_jitter = 0.0;       // offset drawn from +- offset_jitter
    std::array<int, 3> channel_order = {0, 1, 2};
    uint64_t seed = 0;
};

inline void validate_sim_params(const SimParams& p) {
    if (p.width_mod_amplitude > 0.1)
        throw Error(ErrorCode::BadConfig, "width_mod_amplitude must be <= 0.1");
    if (std::abs(p.tilt_degrees) > 2.0)
        throw Error(ErrorCode::BadConfig, "tilt must be within [-2, 2] degrees");
    if (p.mean_width < 6.0 || p.mean_width > 64.0)
        throw Error(ErrorCode::BadConfig, "mean_width outside [6, 64] px");
}

struct SimScene {
    GrayRaster scan;
    LenticuleGrid truth_grid;
    StripeImage truth_stripe;
    RGBRaster source;
    SimParams params;
};

namespace detail {

// Counter-based generator: a hash of (seed, counter) yields reproducible
// streams independent of platform and evaluation order.
inline uint64_t hash_mix(uint64_t seed, uint64_t counter) {
    uint64_t z = seed * 0x9e3779b97f4a7c15ULL + counter + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform01(uint64_t seed, uint64_t counter) {
    return ((hash_mix(seed, counter) >> 11) + 1.0) * (1.0 / 9007199254740993.0);
}

inline double gaussian(uint64_t seed, uint64_t counter) {
    double u1 = uniform01(seed, 2 * counter);
    double u2 = uniform01(seed, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace detail

// Forward model: lays lenticules with sinusoidally modulated widths across
// the frame, shears them by the tilt, fills each lenticule's three sub-bands
// with the source color sampled at the lenticule center, superimposes dark
// boundary lines and additive noise. Ground-truth grid and stripe image are
// returned alongside the scan.
inline SimScene render_scan(const RGBRaster& src, const SimParams& p) {
    validate_sim_params(p);
    const int H = src.height;
    const int W = src.width;
    const double shift = (H - 1) * std::tan(p.tilt_degrees * M_PI / 180.0);

    std::vector<double> tpos;
    double t = std::max(0.0, -shift);
    const double limit = W - 1 - std::max(0.0, shift);
    for (int m = 0; t <= limit; ++m) {
        tpos.push_back(t);
        t += p.mean_width * (1.0 + p.width_mod_amplitude *
                                       std::sin(2.0 * M_PI * m / p.width_mod_period));
    }
    const int M = static_cast<int>(tpos.size());
    if (M < 9)
        throw Error(ErrorCode::SourceTooNarrow, "source too narrow for 8 lenticules");

    SimScene scene;
    scene.params = p;
    scene.source = src;
    scene.truth_grid.image_height = H;
    scene.truth_grid.image_width = W;
    scene.truth_grid.t = tpos;
    scene.truth_grid.b.resize(M);
    for (int m = 0; m < M; ++m) scene.truth_grid.b[m] = tpos[m] + shift;

    scene.scan = GrayRaster(H, W);
    scene.truth_stripe = StripeImage(H, 3 * (M - 1));
    scene.truth_stripe.src_height = H;
    scene.truth_stripe.src_width = W;
    scene.truth_stripe.channel_order = p.channel_order;

    const double gain =
        1.0 + p.gain_jitter * (2.0 * detail::uniform01(p.seed, 0xA001) - 1.0);
    const double offset = p.offset_jitter * (2.0 * detail::uniform01(p.seed, 0xA002) - 1.0);
    const double line_sigma = std::max(p.boundary_width * 0.5, 1e-6);

    std::vector<double> ideal(W);
    for (int h = 0; h < H; ++h) {
        double s = (H > 1) ? static_cast<double>(h) / (H - 1) : 0.0;
        double row_shift = s * shift;

        // Piecewise-constant row profile, integrated over each pixel's
        // footprint [i-0.5, i+0.5). Uncovered margins default to mid-gray.
        std::fill(ideal.begin(), ideal.end(), 0.5);
        std::vector<double> cover(W, 0.0);
        for (int m = 0; m + 1 < M; ++m) {
            double x0 = tpos[m] + row_shift;
            double x1 = tpos[m + 1] + row_shift;
            double cx = 0.5 * (x0 + x1);
            int sc = std::clamp(static_cast<int>(std::lround(cx)), 0, W - 1);
            std::array<float, 3> v = {src.at(h, sc, 0), src.at(h, sc, 1), src.at(h, sc, 2)};
            double band = (x1 - x0) / 3.0;
            for (int j = 0; j < 3; ++j) {
                double a = x0 + j * band;
                double b = x0 + (j + 1) * band;
                double val = v[p.channel_order[j]];
                scene.truth_stripe.at(h, 3 * m + j, p.channel_order[j]) = static_cast<float>(val);
                int i0 = std::max(0, static_cast<int>(std::floor(a + 0.5)));
                int i1 = std::min(W - 1, static_cast<int>(std::floor(b + 0.5)));
                for (int i = i0; i <= i1; ++i) {
                    double overlap = std::min(b, i + 0.5) - std::max(a, i - 0.5);
                    if (overlap > 0.0) {
                        if (cover[i] == 0.0) ideal[i] = 0.0;
                        ideal[i] += overlap * val;
                        cover[i] += overlap;
                    }
                }
            }
        }
        for (int i = 0; i < W; ++i) {
            if (cover[i] > 0.0) {
                // Blend any uncovered sliver of the pixel with mid-gray.
                ideal[i] += (1.0 - std::min(cover[i], 1.0)) * 0.5;
            }
        }

        // Dark boundary lines, evaluated at pixel centers from the two
        // nearest boundaries.
        for (int i = 0; i < W; ++i) {
            auto it = std::upper_bound(tpos.begin(), tpos.end(), i - row_shift);
            double atten = 1.0;
            for (int d = -1; d <= 0; ++d) {
                auto jt = it + d;
                if (jt < tpos.begin() || jt >= tpos.end()) continue;
                double dist = i - (*jt + row_shift);
                atten *= 1.0 - p.boundary_depth *
                                   std::exp(-0.5 * dist * dist / (line_sigma * line_sigma));
            }
            double v = ideal[i] * atten;
            v = gain * v + offset;
            if (p.noise_sigma > 0.0)
                v += p.noise_sigma *
                     detail::gaussian(p.seed, static_cast<uint64_t>(h) * W + i + 0x10000);
            scene.scan.at(h, i) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return scene;
}

struct RoundTripMetrics {
    double psnr_db = 0.0;  // +infinity when identical
    std::array<double, 3> mae = {0.0, 0.0, 0.0};
};

// PSNR / per-channel MAE against the scene source, over the region that
// excludes a two-lenticule border on every side. The pipeline output must be
// resampled to source dimensions first.
inline RoundTripMetrics round_trip_error(const SimScene& scene, const RGBRaster& output) {
    const RGBRaster& src = scene.source;
    if (output.height != src.height || output.width != src.width)
        throw Error(ErrorCode::DimMismatch, "output dims differ from scene source");

    const LenticuleGrid& g = scene.truth_grid;
    double wbar = (g.t.back() - g.t.front()) / (g.boundary_count() - 1);
    int margin = static_cast<int>(std::ceil(2.0 * wbar));
    int x0 = std::max(margin, static_cast<int>(std::ceil(std::max(g.t.front(), g.b.front()))) + margin);
    int x1 = std::min(src.width - 1 - margin,
                      static_cast<int>(std::floor(std::min(g.t.back(), g.b.back()))) - margin);
    int y0 = margin, y1 = src.height - 1 - margin;
    if (x1 <= x0 || y1 <= y0)
        throw Error(ErrorCode::DimMismatch, "valid region empty after border exclusion");

    double sq = 0.0;
    std::array<double, 3> abs_sum = {0.0, 0.0, 0.0};
    size_t count = 0;
    for (int h = y0; h <= y1; ++h)
        for (int w = x0; w <= x1; ++w) {
            for (int c = 0; c < 3; ++c) {
                double d = static_cast<double>(output.at(h, w, c)) - src.at(h, w, c);
                sq += d * d;
                abs_sum[c] += std::abs(d);
            }
            ++count;
        }

    RoundTripMetrics m;
    double mse = sq / (3.0 * count);
    m.psnr_db = (mse == 0.0) ? std::numeric_limits<double>::infinity()
                             : 10.0 * std::log10(1.0 / mse);
    for (int c = 0; c < 3; ++c) m.mae[c] = abs_sum[c] / count;
    return m;
}

}  // namespace lenticolor
