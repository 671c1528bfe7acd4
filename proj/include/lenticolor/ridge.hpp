#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"

namespace lenticolor {

struct WidthEstimate {
    double w_hat = 0.0;      // average lenticule width, px
    double confidence = 0.0; // dominant peak power / median band power
};

constexpr double kMinLenticuleWidth = 6.0;
constexpr double kMaxLenticuleWidth = 64.0;
constexpr double kWidthConfidenceThreshold = 4.0;

namespace detail {

inline std::vector<float> gaussian_kernel(double sigma) {
    if (sigma <= 0.0) return {1.0f};
    int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<float> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * i * i / (sigma * sigma));
        k[i + radius] = static_cast<float>(v);
        sum += v;
    }
    for (float& v : k) v = static_cast<float>(v / sum);
    return k;
}

// Second derivative of a Gaussian, normalized to unit Gaussian mass and
// forced to zero sum so constant inputs give exactly zero response.
inline std::vector<float> gaussian_d2_kernel(double sigma) {
    int radius = std::max(2, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<float> k(2 * radius + 1);
    double norm = 0.0;
    for (int i = -radius; i <= radius; ++i)
        norm += std::exp(-0.5 * i * i / (sigma * sigma));
    for (int i = -radius; i <= radius; ++i) {
        double g = std::exp(-0.5 * i * i / (sigma * sigma)) / norm;
        k[i + radius] = static_cast<float>((i * i - sigma * sigma) / (sigma * sigma * sigma * sigma) * g);
    }
    double sum = std::accumulate(k.begin(), k.end(), 0.0);
    for (float& v : k) v = static_cast<float>(v - sum / k.size());
    return k;
}

inline int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

inline void convolve_rows(Plane& img, const std::vector<float>& kernel) {
    int radius = static_cast<int>(kernel.size()) / 2;
    std::vector<float> row(img.width);
    for (int h = 0; h < img.height; ++h) {
        float* p = img.data.data() + static_cast<size_t>(h) * img.width;
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int j = -radius; j <= radius; ++j)
                acc += kernel[j + radius] * p[reflect(x + j, img.width)];
            row[x] = static_cast<float>(acc);
        }
        std::copy(row.begin(), row.end(), p);
    }
}

inline void convolve_cols(Plane& img, const std::vector<float>& kernel) {
    int radius = static_cast<int>(kernel.size()) / 2;
    std::vector<float> col(img.height);
    for (int x = 0; x < img.width; ++x) {
        for (int h = 0; h < img.height; ++h) {
            double acc = 0.0;
            for (int j = -radius; j <= radius; ++j)
                acc += kernel[j + radius] * img.at(reflect(h + j, img.height), x);
            col[h] = static_cast<float>(acc);
        }
        for (int h = 0; h < img.height; ++h) img.at(h, x) = col[h];
    }
}

inline double percentile(std::vector<float> v, double q) {
    double pos = q * (v.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    size_t hi = std::min(lo + 1, v.size() - 1);
    std::nth_element(v.begin(), v.begin() + lo, v.end());
    float a = v[lo];
    std::nth_element(v.begin() + lo, v.begin() + hi, v.end());
    float b = v[hi];
    return a + (pos - lo) * (b - a);
}

}  // namespace detail

// Vertical-valley ridge detector: anisotropic Gaussian smoothing (vertical
// sigma 4x the scale, to tolerate tilt up to ~2 degrees) followed by the
// horizontal second derivative. Dark vertical valleys are intensity minima,
// so the positive part of the curvature highlights them. The response is
// rescaled to [0,1] by its 0.1st/99.9th percentiles.
inline LikelihoodMap detect_ridges(const GrayRaster& scan, double scale = 1.0) {
    if (scale < 0.5 || scale > 5.0)
        throw Error(ErrorCode::ScaleOutOfRange, "ridge scale must be in [0.5, 5]");

    LikelihoodMap resp(scan.height, scan.width);
    resp.data = scan.data;
    detail::convolve_cols(resp, detail::gaussian_kernel(4.0 * scale));
    detail::convolve_rows(resp, detail::gaussian_d2_kernel(scale));
    for (float& v : resp.data) v = std::max(v, 0.0f);

    double lo = detail::percentile(resp.data, 0.001);
    double hi = detail::percentile(resp.data, 0.999);
    if (hi - lo < 1e-6) {
        std::fill(resp.data.begin(), resp.data.end(), 0.0f);
        return resp;
    }
    double inv = 1.0 / (hi - lo);
    for (float& v : resp.data)
        v = static_cast<float>(std::clamp((v - lo) * inv, 0.0, 1.0));
    return resp;
}

namespace detail {

// Welch-averaged power spectrum of the column-mean profile: Hann-windowed,
// mean-removed segments with 50% overlap. Averaging keeps the noise floor
// flat enough that the peak/median confidence test is meaningful.
struct ProfileSpectrum {
    int window = 0;
    std::vector<double> power;  // bins 0..window/2
};

inline ProfileSpectrum profile_spectrum(const std::vector<double>& profile) {
    int n = static_cast<int>(profile.size());
    int window = 256;
    while (window > n) window /= 2;
    window = std::max(window, 8);

    ProfileSpectrum spec;
    spec.window = window;
    spec.power.assign(window / 2 + 1, 0.0);

    std::vector<double> hann(window);
    for (int i = 0; i < window; ++i)
        hann[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / (window - 1)));

    int hop = window / 2;
    int segments = 0;
    std::vector<double> seg(window);
    for (int start = 0; start + window <= n; start += hop) {
        double mean = 0.0;
        for (int i = 0; i < window; ++i) mean += profile[start + i];
        mean /= window;
        for (int i = 0; i < window; ++i) seg[i] = (profile[start + i] - mean) * hann[i];
        for (int k = 0; k <= window / 2; ++k) {
            double re = 0.0, im = 0.0;
            for (int i = 0; i < window; ++i) {
                double ph = -2.0 * M_PI * k * i / window;
                re += seg[i] * std::cos(ph);
                im += seg[i] * std::sin(ph);
            }
            spec.power[k] += re * re + im * im;
        }
        ++segments;
    }
    if (segments > 0)
        for (double& p : spec.power) p /= segments;
    return spec;
}

struct AlignedProfile {
    std::vector<double> profile;  // column means along sheared lines, center-row reference
    double shear = 0.0;           // boundary displacement from the top row to the bottom row, px
};

inline std::vector<double> band_profile(const LikelihoodMap& map, int h0, int h1) {
    std::vector<double> p(map.width, 0.0);
    for (int h = h0; h < h1; ++h)
        for (int x = 0; x < map.width; ++x) p[x] += map.at(h, x);
    for (double& v : p) v /= std::max(1, h1 - h0);
    return p;
}

// Column-mean profile accumulated along sheared lines. A plain column mean
// smears the boundary peaks by the full tilt displacement (tens of pixels on
// tall scans), so the global shear is first estimated by cross-correlating
// the top-third and bottom-third column means, then every row is sampled
// with its proportional horizontal offset.
//
// Because the boundary pattern is nearly periodic, the cross-correlation has
// alias peaks one lenticule width away from the true lag. Every strong local
// maximum is therefore tried, and the lag whose aligned profile has the
// highest variance wins: an alias misaligns the rows by a full period over
// the frame height and washes the profile flat.
inline AlignedProfile aligned_profile(const LikelihoodMap& map) {
    const int H = map.height, W = map.width;

    // Accumulate relative to the center row so a vertical flip (which negates
    // the shear) reproduces the profile exactly.
    auto accumulate = [&](double shear, std::vector<double>& prof) {
        prof.assign(W, 0.0);
        const double inv = (H > 1) ? 1.0 / (H - 1) : 0.0;
        for (int h = 0; h < H; ++h) {
            double offset = (h - 0.5 * (H - 1)) * inv * shear;
            for (int x = 0; x < W; ++x) {
                double xs = x + offset;
                if (xs < 0.0 || xs > W - 1) continue;
                int i = static_cast<int>(xs);
                double f = xs - i;
                double a = map.at(h, i);
                double b = (i + 1 < W) ? map.at(h, i + 1) : 0.0;
                prof[x] += (1.0 - f) * a + f * b;
            }
        }
        for (double& v : prof) v /= H;
    };

    AlignedProfile out;
    const int third = std::max(1, H / 3);
    std::vector<double> lags;
    if (H >= 12) {
        std::vector<double> top = band_profile(map, 0, third);
        std::vector<double> bot = band_profile(map, H - third, H);
        double tm = 0.0, bm = 0.0;
        for (int x = 0; x < W; ++x) {
            tm += top[x];
            bm += bot[x];
        }
        tm /= W;
        bm /= W;

        // Tilt is bounded by ~2 degrees, so the band displacement cannot
        // exceed tan(2 deg) * (2/3) * H plus slack.
        int max_lag = std::min(W / 4, static_cast<int>(std::ceil(0.025 * H)) + 2);
        std::vector<double> score(2 * max_lag + 1, 0.0);
        int best = max_lag;  // lag 0
        for (int lag = -max_lag; lag <= max_lag; ++lag) {
            double acc = 0.0;
            int cnt = 0;
            int x0 = std::max(0, -lag), x1 = std::min(W, W - lag);
            for (int x = x0; x < x1; ++x) {
                acc += (top[x] - tm) * (bot[x + lag] - bm);
                ++cnt;
            }
            score[lag + max_lag] = (cnt > 0) ? acc / cnt : 0.0;
            if (score[lag + max_lag] > score[best]) best = lag + max_lag;
        }

        auto refined = [&](int idx) {
            double lag = idx - max_lag;
            if (idx > 0 && idx + 1 < static_cast<int>(score.size())) {
                double denom = score[idx - 1] - 2.0 * score[idx] + score[idx + 1];
                if (denom < 0.0)
                    lag += std::clamp(0.5 * (score[idx - 1] - score[idx + 1]) / denom, -0.5, 0.5);
            }
            return lag;
        };
        lags.push_back(refined(best));
        for (int idx = 1; idx + 1 < static_cast<int>(score.size()); ++idx)
            if (idx != best && score[idx] > score[idx - 1] && score[idx] >= score[idx + 1] &&
                score[idx] >= 0.25 * score[best])
                lags.push_back(refined(idx));
    }
    if (lags.empty()) lags.push_back(0.0);

    // Band centers sit 1/6 and 5/6 of the way down the frame.
    double c_top = 0.5 * (third - 1);
    double c_bot = 0.5 * (H - third + H - 1);
    double to_shear = (c_bot > c_top) ? static_cast<double>(H - 1) / (c_bot - c_top) : 0.0;

    std::vector<double> trial;
    double best_var = -1.0;
    for (double lag : lags) {
        double shear = lag * to_shear;
        accumulate(shear, trial);
        double mean = std::accumulate(trial.begin(), trial.end(), 0.0) / W;
        double var = 0.0;
        for (double v : trial) var += (v - mean) * (v - mean);
        if (var > best_var) {
            best_var = var;
            out.shear = shear;
            out.profile.swap(trial);
        }
    }
    return out;
}

// Peak prominence: height above the higher of the two minimum valleys on the
// way to the nearest taller sample (or the profile edge).
inline double prominence(const std::vector<double>& p, int i) {
    double left_min = p[i], right_min = p[i];
    for (int j = i - 1; j >= 0; --j) {
        if (p[j] > p[i]) break;
        left_min = std::min(left_min, p[j]);
    }
    for (int j = i + 1; j < static_cast<int>(p.size()); ++j) {
        if (p[j] > p[i]) break;
        right_min = std::min(right_min, p[j]);
    }
    // On the first/last column only one side exists; use its valley alone.
    if (i == 0) return p[i] - right_min;
    if (i + 1 == static_cast<int>(p.size())) return p[i] - left_min;
    return p[i] - std::max(left_min, right_min);
}

// Sub-pixel boundary peaks of a profile: local maxima with prominence at
// least 10% of the value range, thinned to a minimum separation of 0.7*w
// (taller peaks win), each refined by parabolic interpolation.
inline std::vector<double> profile_peaks(const std::vector<double>& profile, double w) {
    const int n = static_cast<int>(profile.size());
    double pmin = *std::min_element(profile.begin(), profile.end());
    double pmax = *std::max_element(profile.begin(), profile.end());
    double min_prom = 0.1 * (pmax - pmin);

    std::vector<int> candidates;
    // A boundary can sit on the first or last column, where no interior
    // local maximum exists; accept a monotone edge sample of sufficient
    // prominence there.
    if (n >= 2 && profile[0] > profile[1] && prominence(profile, 0) >= min_prom)
        candidates.push_back(0);
    for (int i = 1; i + 1 < n; ++i)
        if (profile[i] > profile[i - 1] && profile[i] >= profile[i + 1] &&
            prominence(profile, i) >= min_prom)
            candidates.push_back(i);
    if (n >= 2 && profile[n - 1] > profile[n - 2] && prominence(profile, n - 1) >= min_prom)
        candidates.push_back(n - 1);

    std::sort(candidates.begin(), candidates.end(),
              [&](int a, int c) { return profile[a] > profile[c]; });
    std::vector<int> kept;
    const double min_sep = 0.7 * w;
    for (int c : candidates) {
        bool ok = true;
        for (int k : kept)
            if (std::abs(c - k) < min_sep) { ok = false; break; }
        if (ok) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());

    std::vector<double> peaks;
    for (int i : kept) {
        double delta = 0.0;
        if (i > 0 && i + 1 < n) {
            double a = profile[i - 1], b = profile[i], c = profile[i + 1];
            double denom = a - 2.0 * b + c;
            if (denom < 0.0) delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
        }
        peaks.push_back(std::clamp(i + delta, 0.0, static_cast<double>(n - 1)));
    }
    return peaks;
}

}  // namespace detail

// Estimates the average lenticule width from the spectral peak of the
// tilt-compensated column-mean profile. Search is restricted to periods in
// [6, 64] px; the peak bin is refined by quadratic interpolation of
// log-power, then sharpened by a long-lag autocorrelation fit.
inline WidthEstimate estimate_width(const LikelihoodMap& map) {
    std::vector<double> profile = detail::aligned_profile(map).profile;

    detail::ProfileSpectrum spec = detail::profile_spectrum(profile);
    const int w = spec.window;
    int kmin = std::max(1, static_cast<int>(std::ceil(w / kMaxLenticuleWidth)));
    int kmax = std::min(w / 2 - 1, static_cast<int>(std::floor(w / kMinLenticuleWidth)));
    if (kmax <= kmin)
        throw Error(ErrorCode::NoDominantPeak, "profile too short for period search");

    int kstar = kmin;
    for (int k = kmin; k <= kmax; ++k)
        if (spec.power[k] > spec.power[kstar]) kstar = k;

    std::vector<double> band(spec.power.begin() + kmin, spec.power.begin() + kmax + 1);
    std::nth_element(band.begin(), band.begin() + band.size() / 2, band.end());
    double med = band[band.size() / 2];

    double confidence = (med > 0.0) ? spec.power[kstar] / med
                                    : std::numeric_limits<double>::infinity();
    if (!(confidence > kWidthConfidenceThreshold))
        throw Error(ErrorCode::NoDominantPeak, "no dominant spectral peak");

    // Octave correction: the color bands inside each lenticule put strong
    // power at harmonics of the boundary period, so the global peak can land
    // an octave (or two) high. Fold down while a local peak near half the
    // frequency carries a substantial share of the current peak's power.
    while (kstar >= 2 * kmin) {
        int half = kstar / 2;
        int best = -1;
        for (int k = std::max(kmin, half - 1); k <= std::min(kmax, half + 1); ++k)
            if (best < 0 || spec.power[k] > spec.power[best]) best = k;
        if (best >= 0 && spec.power[best] >= 0.25 * spec.power[kstar])
            kstar = best;
        else
            break;
    }

    double k_ref = kstar;
    if (kstar > 1 && kstar < w / 2) {
        double l0 = std::log(std::max(spec.power[kstar - 1], 1e-300));
        double l1 = std::log(std::max(spec.power[kstar], 1e-300));
        double l2 = std::log(std::max(spec.power[kstar + 1], 1e-300));
        double denom = l0 - 2.0 * l1 + l2;
        if (denom < 0.0) {
            double delta = 0.5 * (l0 - l2) / denom;
            k_ref = kstar + std::clamp(delta, -0.5, 0.5);
        }
    }

    WidthEstimate est;
    est.w_hat = std::clamp(w / k_ref, kMinLenticuleWidth, kMaxLenticuleWidth);
    est.confidence = confidence;

    // Long-baseline refinement: the spectral estimate is limited by the
    // window resolution, so anchor on the sub-pixel positions of the first
    // and last boundary peaks and divide the span by the number of periods
    // it covers. The rounding absorbs any missed interior peaks.
    // The period count is accumulated per consecutive gap (each close to one
    // period, occasionally a small integer when a peak was missed) so a few
    // percent of coarse error can never shift the total by a whole period.
    std::vector<double> peaks = detail::profile_peaks(profile, est.w_hat);
    if (peaks.size() >= 5) {
        double span = peaks.back() - peaks.front();
        long n = 0;
        for (size_t i = 0; i + 1 < peaks.size(); ++i)
            n += std::max(1L, std::lround((peaks[i + 1] - peaks[i]) / est.w_hat));
        if (n >= 4) {
            double w_ref = span / n;
            if (std::abs(w_ref - est.w_hat) < 0.1 * est.w_hat)
                est.w_hat = std::clamp(w_ref, kMinLenticuleWidth, kMaxLenticuleWidth);
        }
    }
    return est;
}

}  // namespace lenticolor
