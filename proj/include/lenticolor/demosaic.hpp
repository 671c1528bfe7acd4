#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"

namespace lenticolor {

enum class FillKind { Nearest, Linear, Cubic };

enum class ConvexKernel { Nearest, Linear, ConvexCubic };

// Per column and channel slot, the x-positions of the up-to-6 nearest valid
// columns of that slot, sorted by distance with ties broken toward the left.
// On a column whose channel is valid, the set degenerates to that column.
struct NeighborIndex {
    int width = 0;
    std::vector<std::array<int, 6>> cols;  // indexed (col * 3 + slot)
    std::vector<int> counts;

    const std::array<int, 6>& neighbors(int col, int slot) const { return cols[col * 3 + slot]; }
    int count(int col, int slot) const { return counts[col * 3 + slot]; }
};

inline NeighborIndex build_neighbor_index(int width) {
    if (width < 9)
        throw Error(ErrorCode::BadConfig, "stripe width must be >= 9");
    NeighborIndex idx;
    idx.width = width;
    idx.cols.resize(static_cast<size_t>(width) * 3);
    idx.counts.resize(static_cast<size_t>(width) * 3, 0);

    for (int slot = 0; slot < 3; ++slot) {
        std::vector<int> valid;
        for (int v = slot; v < width; v += 3) valid.push_back(v);
        for (int c = 0; c < width; ++c) {
            auto& entry = idx.cols[c * 3 + slot];
            int& count = idx.counts[c * 3 + slot];
            if (c % 3 == slot) {
                entry[0] = c;
                count = 1;
                continue;
            }
            std::vector<int> sorted = valid;
            std::sort(sorted.begin(), sorted.end(), [c](int a, int b) {
                int da = std::abs(a - c), db = std::abs(b - c);
                if (da != db) return da < db;
                return a < b;  // tie: left neighbor first
            });
            count = std::min<int>(6, static_cast<int>(sorted.size()));
            for (int k = 0; k < count; ++k) entry[k] = sorted[k];
        }
    }
    return idx;
}

namespace detail {

inline float catmull_rom(float p0, float p1, float p2, float p3, double u) {
    double u2 = u * u, u3 = u2 * u;
    return static_cast<float>(0.5 * ((2.0 * p1) + (-p0 + p2) * u +
                                     (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2 +
                                     (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u3));
}

// Catmull-Rom basis weights at parameter u in [0,1) over the four control
// points (p0..p3).
inline std::array<double, 4> catmull_rom_weights(double u) {
    double u2 = u * u, u3 = u2 * u;
    return {0.5 * (-u + 2.0 * u2 - u3),
            0.5 * (2.0 - 5.0 * u2 + 3.0 * u3),
            0.5 * (u + 4.0 * u2 - 3.0 * u3),
            0.5 * (-u2 + u3)};
}

}  // namespace detail

// Per-row, per-channel 1-D interpolation across the valid columns of each
// channel. Extrapolation beyond the outermost valid column clamps to the
// nearest valid value; output is clamped to [0,1].
inline RGBRaster fill_baseline(const StripeImage& stripe, FillKind kind) {
    RGBRaster out(stripe.height, stripe.width);
    for (int slot = 0; slot < 3; ++slot) {
        int ch = stripe.channel_order[slot];
        const int n = (stripe.width - 1 - slot) / 3 + 1;  // valid column count
        for (int h = 0; h < stripe.height; ++h) {
            auto val = [&](int j) { return stripe.at(h, slot + 3 * std::clamp(j, 0, n - 1), ch); };
            for (int c = 0; c < stripe.width; ++c) {
                float v;
                if (c % 3 == slot) {
                    v = stripe.at(h, c, ch);
                } else if (c < slot) {
                    v = val(0);
                } else if (c > slot + 3 * (n - 1)) {
                    v = val(n - 1);
                } else {
                    int j = (c - slot) / 3;
                    double u = (c - slot - 3 * j) / 3.0;
                    switch (kind) {
                        case FillKind::Nearest:
                            v = val(u < 0.5 ? j : j + 1);
                            break;
                        case FillKind::Linear:
                            v = static_cast<float>((1.0 - u) * val(j) + u * val(j + 1));
                            break;
                        case FillKind::Cubic:
                            v = detail::catmull_rom(val(j - 1), val(j), val(j + 1), val(j + 2), u);
                            break;
                        default:
                            v = 0.0f;
                    }
                }
                out.at(h, c, ch) = std::clamp(v, 0.0f, 1.0f);
            }
        }
    }
    return out;
}

// Weight provider for the convex fill: either an analytic kernel derived from
// column geometry, or an externally supplied coefficient tensor.
struct WeightSource {
    bool external = false;
    ConvexKernel kernel = ConvexKernel::ConvexCubic;
    const CoeffTensor* tensor = nullptr;

    static WeightSource analytic(ConvexKernel k) {
        WeightSource s;
        s.kernel = k;
        return s;
    }
    static WeightSource from_tensor(const CoeffTensor& t) {
        WeightSource s;
        s.external = true;
        s.tensor = &t;
        return s;
    }
};

namespace detail {

// Analytic weights over the neighbor list of (col, slot). Weights are
// non-negative and sum to 1.
inline void analytic_weights(ConvexKernel kernel, int col, int slot, const NeighborIndex& idx,
                             std::array<double, 6>& w) {
    const auto& nb = idx.neighbors(col, slot);
    const int n = idx.count(col, slot);
    w.fill(0.0);

    if (kernel == ConvexKernel::Nearest) {
        w[0] = 1.0;
        return;
    }

    // Nearest valid columns on each side, as positions in the neighbor list.
    int left = -1, right = -1;
    for (int k = 0; k < n; ++k) {
        if (nb[k] < col && (left < 0 || nb[k] > nb[left])) left = k;
        if (nb[k] > col && (right < 0 || nb[k] < nb[right])) right = k;
    }
    if (left < 0 || right < 0) {
        w[0] = 1.0;  // one-sided: clamp to nearest
        return;
    }
    const double span = nb[right] - nb[left];
    const double u = (col - nb[left]) / span;

    if (kernel == ConvexKernel::Linear) {
        w[left] = 1.0 - u;
        w[right] = u;
        return;
    }

    // Convex cubic: clamped, renormalized Catmull-Rom weights over the two
    // flanking neighbors on each side; missing outer points fold into the
    // nearer ones.
    int left2 = -1, right2 = -1;
    for (int k = 0; k < n; ++k) {
        if (nb[k] < nb[left] && (left2 < 0 || nb[k] > nb[left2])) left2 = k;
        if (nb[k] > nb[right] && (right2 < 0 || nb[k] < nb[right2])) right2 = k;
    }
    auto cr = catmull_rom_weights(u);
    double acc[4] = {std::max(cr[0], 0.0), std::max(cr[1], 0.0), std::max(cr[2], 0.0),
                     std::max(cr[3], 0.0)};
    double sum = acc[0] + acc[1] + acc[2] + acc[3];
    w[left2 >= 0 ? left2 : left] += acc[0] / sum;
    w[left] += acc[1] / sum;
    w[right] += acc[2] / sum;
    w[right2 >= 0 ? right2 : right] += acc[3] / sum;
}

}  // namespace detail

// Fills the missing channels as convex combinations of the nearest valid
// same-channel columns. Valid columns pass through exactly; convexity bounds
// the output so no clamp is needed.
inline RGBRaster fill_convex(const StripeImage& stripe, const WeightSource& src) {
    if (src.external) {
        if (!src.tensor || src.tensor->height != stripe.height || src.tensor->width != stripe.width)
            throw Error(ErrorCode::TensorDimMismatch, "coeff tensor dims differ from stripe");
    }
    NeighborIndex idx = build_neighbor_index(stripe.width);
    RGBRaster out(stripe.height, stripe.width);

    std::array<double, 6> w;
    for (int c = 0; c < stripe.width; ++c) {
        for (int slot = 0; slot < 3; ++slot) {
            int ch = stripe.channel_order[slot];
            if (c % 3 == slot) {
                for (int h = 0; h < stripe.height; ++h)
                    out.at(h, c, ch) = stripe.at(h, c, ch);
                continue;
            }
            const auto& nb = idx.neighbors(c, slot);
            const int n = idx.count(c, slot);
            if (!src.external) {
                detail::analytic_weights(src.kernel, c, slot, idx, w);
                for (int h = 0; h < stripe.height; ++h) {
                    double acc = 0.0;
                    for (int k = 0; k < n; ++k) acc += w[k] * stripe.at(h, nb[k], ch);
                    out.at(h, c, ch) = static_cast<float>(acc);
                }
            } else {
                for (int h = 0; h < stripe.height; ++h) {
                    double acc = 0.0, wsum = 0.0;
                    for (int k = 0; k < n; ++k) {
                        double wk = src.tensor->at(h, c, ch, k);
                        acc += wk * stripe.at(h, nb[k], ch);
                        wsum += wk;
                    }
                    // Weights on out-of-range neighbor entries renormalize
                    // over the available ones.
                    out.at(h, c, ch) = static_cast<float>(wsum > 0.0 ? acc / wsum
                                                                     : stripe.at(h, nb[0], ch));
                }
            }
        }
    }
    return out;
}

}  // namespace lenticolor
