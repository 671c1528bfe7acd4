#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "lenticolor/error.hpp"
#include "lenticolor/raster.hpp"
#include "lenticolor/ridge.hpp"

namespace lenticolor {

struct FitConfig {
    double lambda1 = 1.0;      // weight of the width-deviation penalty
    double lambda2 = 10.0;     // weight of the width-smoothness penalty
    int max_iters = 200;
    double grad_tol = 1e-6;    // infinity norm of the projected gradient
    double smooth_sigma = 1.0; // horizontal pre-smoothing of the map, px
    double width_hint = 0.0;   // average lenticule width estimate w_hat
    double f_tol = 1e-10;      // relative objective-decrease stall threshold
};

struct FitReport {
    double objective = 0.0;
    double data_term = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Width-deviation penalty: squared first differences of t and b against the
// average width estimate.
inline double regularizer_r1(const LenticuleGrid& g, double w_hat) {
    double acc = 0.0;
    for (size_t m = 0; m + 1 < g.t.size(); ++m) {
        double dt = g.t[m + 1] - g.t[m] - w_hat;
        double db = g.b[m + 1] - g.b[m] - w_hat;
        acc += dt * dt + db * db;
    }
    return acc;
}

// Width-smoothness penalty: squared second differences of t and b.
inline double regularizer_r2(const LenticuleGrid& g) {
    double acc = 0.0;
    for (size_t m = 0; m + 2 < g.t.size(); ++m) {
        double dt = g.t[m] - 2.0 * g.t[m + 1] + g.t[m + 2];
        double db = g.b[m] - 2.0 * g.b[m + 1] + g.b[m + 2];
        acc += dt * dt + db * db;
    }
    return acc;
}

namespace detail {

inline LikelihoodMap smooth_map_x(const LikelihoodMap& map, double sigma) {
    if (sigma <= 0.0) return map;
    LikelihoodMap out = map;
    convolve_rows(out, gaussian_kernel(sigma));
    return out;
}

// Bilinear-in-x sample of the map at integer row h; zero outside bounds.
inline double sample_x(const Plane& map, int h, double x) {
    if (x < 0.0 || x > map.width - 1) return 0.0;
    int i = static_cast<int>(x);
    double f = x - i;
    double a = map.at(h, i);
    double b = (i + 1 < map.width) ? map.at(h, i + 1) : 0.0;
    return (1.0 - f) * a + f * b;
}

inline double sample_x_deriv(const Plane& map, int h, double x) {
    if (x < 0.0 || x > map.width - 1) return 0.0;
    int i = static_cast<int>(x);
    double a = map.at(h, i);
    double b = (i + 1 < map.width) ? map.at(h, i + 1) : 0.0;
    return b - a;
}

struct ObjectiveTerms {
    double data = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double total = 0.0;
};

// Evaluates the objective on flat variables x = [t..., b...]; the gradient is
// accumulated into grad when non-null.
inline ObjectiveTerms eval_objective(const std::vector<double>& x, int M,
                                     const LikelihoodMap& zmap, const FitConfig& cfg,
                                     std::vector<double>* grad) {
    const int H = zmap.height;
    const double* t = x.data();
    const double* b = x.data() + M;
    if (grad) std::fill(grad->begin(), grad->end(), 0.0);

    ObjectiveTerms out;
    const int W = zmap.width;
    const double inv = (H > 1) ? 1.0 / (H - 1) : 0.0;
    const float* base = zmap.data.data();
    for (int m = 0; m < M; ++m) {
        const double tm = t[m], diff = b[m] - tm;
        double gsum_t = 0.0, gsum_b = 0.0;
        for (int h = 0; h < H; ++h) {
            double s = h * inv;
            double xm = tm + s * diff;
            if (xm < 0.0 || xm > W - 1) continue;
            int i = static_cast<int>(xm);
            double f = xm - i;
            const float* row = base + static_cast<size_t>(h) * W;
            double za = row[i];
            double zb = (i + 1 < W) ? row[i + 1] : 0.0;
            out.data -= (1.0 - f) * za + f * zb;
            if (grad) {
                double dz = zb - za;
                gsum_t -= dz * (1.0 - s);
                gsum_b -= dz * s;
            }
        }
        if (grad) {
            (*grad)[m] += gsum_t;
            (*grad)[M + m] += gsum_b;
        }
    }

    const double w = cfg.width_hint;
    for (int m = 0; m + 1 < M; ++m) {
        double dt = t[m + 1] - t[m] - w;
        double db = b[m + 1] - b[m] - w;
        out.r1 += dt * dt + db * db;
        if (grad) {
            (*grad)[m] -= 2.0 * cfg.lambda1 * dt;
            (*grad)[m + 1] += 2.0 * cfg.lambda1 * dt;
            (*grad)[M + m] -= 2.0 * cfg.lambda1 * db;
            (*grad)[M + m + 1] += 2.0 * cfg.lambda1 * db;
        }
    }
    for (int m = 0; m + 2 < M; ++m) {
        double dt = t[m] - 2.0 * t[m + 1] + t[m + 2];
        double db = b[m] - 2.0 * b[m + 1] + b[m + 2];
        out.r2 += dt * dt + db * db;
        if (grad) {
            (*grad)[m] += 2.0 * cfg.lambda2 * dt;
            (*grad)[m + 1] -= 4.0 * cfg.lambda2 * dt;
            (*grad)[m + 2] += 2.0 * cfg.lambda2 * dt;
            (*grad)[M + m] += 2.0 * cfg.lambda2 * db;
            (*grad)[M + m + 1] -= 4.0 * cfg.lambda2 * db;
            (*grad)[M + m + 2] += 2.0 * cfg.lambda2 * db;
        }
    }
    out.total = out.data + cfg.lambda1 * out.r1 + cfg.lambda2 * out.r2;
    return out;
}

inline std::vector<double> flatten(const LenticuleGrid& g) {
    std::vector<double> x(g.t.size() * 2);
    std::copy(g.t.begin(), g.t.end(), x.begin());
    std::copy(g.b.begin(), g.b.end(), x.begin() + g.t.size());
    return x;
}

inline LenticuleGrid unflatten(const std::vector<double>& x, const LenticuleGrid& like) {
    LenticuleGrid g;
    g.image_height = like.image_height;
    g.image_width = like.image_width;
    size_t m = x.size() / 2;
    g.t.assign(x.begin(), x.begin() + m);
    g.b.assign(x.begin() + m, x.end());
    return g;
}

}  // namespace detail

// Objective of the grid fit: negated likelihood integral along each fitted
// line plus the two width regularizers.
inline FitReport objective(const LenticuleGrid& grid, const LikelihoodMap& map,
                           const FitConfig& cfg) {
    LikelihoodMap z = detail::smooth_map_x(map, cfg.smooth_sigma);
    auto terms = detail::eval_objective(detail::flatten(grid),
                                        grid.boundary_count(), z, cfg, nullptr);
    FitReport r;
    r.objective = terms.total;
    r.data_term = terms.data;
    r.r1 = terms.r1;
    r.r2 = terms.r2;
    return r;
}

// Analytic gradient with respect to (t, b), length 2M.
inline std::vector<double> objective_gradient(const LenticuleGrid& grid,
                                              const LikelihoodMap& map,
                                              const FitConfig& cfg) {
    LikelihoodMap z = detail::smooth_map_x(map, cfg.smooth_sigma);
    std::vector<double> grad(grid.boundary_count() * 2, 0.0);
    detail::eval_objective(detail::flatten(grid), grid.boundary_count(), z, cfg, &grad);
    return grad;
}

// Peak-detector initialization: local maxima of the tilt-compensated
// column-mean profile with minimum separation 0.7*w_hat and prominence
// >= 0.1*(max-min), sub-pixel refined; gaps wider than 1.5*w_hat are filled
// with equally spaced phantom boundaries. The peaks give the top-row
// positions; the bottom row starts at the same positions displaced by the
// estimated shear.
inline LenticuleGrid init_grid(const LikelihoodMap& map, const WidthEstimate& w) {
    detail::AlignedProfile ap = detail::aligned_profile(map);
    std::vector<double> peaks = detail::profile_peaks(ap.profile, w.w_hat);

    std::vector<double> filled;
    for (size_t i = 0; i < peaks.size(); ++i) {
        filled.push_back(peaks[i]);
        if (i + 1 < peaks.size()) {
            double gap = peaks[i + 1] - peaks[i];
            if (gap > 1.5 * w.w_hat) {
                int inserts = std::max(1, static_cast<int>(std::lround(gap / w.w_hat)) - 1);
                for (int j = 1; j <= inserts; ++j)
                    filled.push_back(peaks[i] + gap * j / (inserts + 1));
            }
        }
    }

    if (filled.size() < 4)
        throw Error(ErrorCode::TooFewPeaks, "fewer than 4 boundary peaks found");

    // Peaks are center-row positions; split the shear symmetrically to get
    // the top and bottom rows.
    LenticuleGrid g;
    g.image_height = map.height;
    g.image_width = map.width;
    g.t = filled;
    g.b = filled;
    const double hw = static_cast<double>(map.width - 1);
    for (double& v : g.t) v = std::clamp(v - 0.5 * ap.shear, 0.0, hw);
    for (double& v : g.b) v = std::clamp(v + 0.5 * ap.shear, 0.0, hw);
    return g;
}

// Bounded limited-memory quasi-Newton descent on (t, b) with box bounds
// [0, W-1]. Only strictly decreasing steps are accepted, so the objective is
// monotone in the iteration count.
inline std::pair<LenticuleGrid, FitReport> refine_grid(const LikelihoodMap& map,
                                                       const LenticuleGrid& init,
                                                       const FitConfig& cfg) {
    const int M = init.boundary_count();
    const int n = 2 * M;
    const double lo = 0.0, hi = map.width - 1.0;

    LikelihoodMap z = detail::smooth_map_x(map, cfg.smooth_sigma);

    std::vector<double> x = detail::flatten(init);
    for (double& v : x) v = std::clamp(v, lo, hi);

    std::vector<double> grad(n), gnew(n);
    auto terms = detail::eval_objective(x, M, z, cfg, &grad);
    if (!std::isfinite(terms.total))
        throw Error(ErrorCode::NonFiniteObjective, "objective non-finite at init");

    struct Pair { std::vector<double> s, y; double rho; };
    std::deque<Pair> mem;
    const size_t mem_cap = 10;

    FitReport report;
    std::vector<double> d(n), xn(n);

    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        // Projected gradient: components pushing against an active bound do
        // not count toward stationarity.
        double pg_norm = 0.0;
        for (int i = 0; i < n; ++i) {
            double g = grad[i];
            if ((x[i] <= lo && g > 0.0) || (x[i] >= hi && g < 0.0)) g = 0.0;
            pg_norm = std::max(pg_norm, std::abs(g));
        }
        if (pg_norm < cfg.grad_tol) {
            report.converged = true;
            break;
        }

        // Two-loop recursion.
        for (int i = 0; i < n; ++i) d[i] = -grad[i];
        std::vector<double> alpha(mem.size());
        for (size_t k = mem.size(); k-- > 0;) {
            double a = 0.0;
            for (int i = 0; i < n; ++i) a += mem[k].s[i] * d[i];
            a *= mem[k].rho;
            alpha[k] = a;
            for (int i = 0; i < n; ++i) d[i] -= a * mem[k].y[i];
        }
        if (!mem.empty()) {
            const Pair& last = mem.back();
            double sy = 0.0, yy = 0.0;
            for (int i = 0; i < n; ++i) {
                sy += last.s[i] * last.y[i];
                yy += last.y[i] * last.y[i];
            }
            if (yy > 0.0) {
                double gamma = sy / yy;
                for (int i = 0; i < n; ++i) d[i] *= gamma;
            }
        }
        for (size_t k = 0; k < mem.size(); ++k) {
            double beta = 0.0;
            for (int i = 0; i < n; ++i) beta += mem[k].y[i] * d[i];
            beta *= mem[k].rho;
            for (int i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * mem[k].s[i];
        }

        double dg = 0.0;
        for (int i = 0; i < n; ++i) dg += d[i] * grad[i];
        if (dg >= 0.0) {
            double gmax = std::max(pg_norm, 1.0);
            for (int i = 0; i < n; ++i) d[i] = -grad[i] / gmax;
            dg = 0.0;
            for (int i = 0; i < n; ++i) dg += d[i] * grad[i];
        }

        // Backtracking line search on the projected point.
        bool accepted = false;
        double fnew = terms.total;
        detail::ObjectiveTerms tnew;
        for (double step = 1.0; step > 1e-12; step *= 0.5) {
            for (int i = 0; i < n; ++i) xn[i] = std::clamp(x[i] + step * d[i], lo, hi);
            double pred = 0.0;
            for (int i = 0; i < n; ++i) pred += grad[i] * (xn[i] - x[i]);
            tnew = detail::eval_objective(xn, M, z, cfg, nullptr);
            fnew = tnew.total;
            if (std::isfinite(fnew) && fnew <= terms.total + 1e-4 * pred && fnew < terms.total) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;

        detail::eval_objective(xn, M, z, cfg, &gnew);
        Pair pr;
        pr.s.resize(n);
        pr.y.resize(n);
        double sy = 0.0;
        for (int i = 0; i < n; ++i) {
            pr.s[i] = xn[i] - x[i];
            pr.y[i] = gnew[i] - grad[i];
            sy += pr.s[i] * pr.y[i];
        }
        if (sy > 1e-12) {
            pr.rho = 1.0 / sy;
            mem.push_back(std::move(pr));
            if (mem.size() > mem_cap) mem.pop_front();
        }

        double decrease = terms.total - tnew.total;
        x.swap(xn);
        grad.swap(gnew);
        terms = tnew;

        // Stall stop: per-iteration progress too small to matter.
        if (decrease <= cfg.f_tol * (std::abs(terms.total) + 1.0)) {
            ++iter;
            report.converged = true;
            break;
        }
    }

    if (!std::isfinite(terms.total))
        throw Error(ErrorCode::NonFiniteObjective, "objective became non-finite");

    LenticuleGrid out = detail::unflatten(x, init);
    for (int m = 0; m + 1 < M; ++m)
        if (out.t[m + 1] <= out.t[m] || out.b[m + 1] <= out.b[m])
            throw Error(ErrorCode::IllPosedFit, "fitted boundaries crossed");

    report.objective = terms.total;
    report.data_term = terms.data;
    report.r1 = terms.r1;
    report.r2 = terms.r2;
    report.iterations = iter;
    return {out, report};
}

}  // namespace lenticolor
