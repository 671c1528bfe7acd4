#pragma once

#include <chrono>
#include <optional>
#include <sstream>
#include <string>

#include "lenticolor/colorspace.hpp"
#include "lenticolor/demosaic.hpp"
#include "lenticolor/extract.hpp"
#include "lenticolor/fit.hpp"
#include "lenticolor/lfr_io.hpp"
#include "lenticolor/raster.hpp"
#include "lenticolor/ridge.hpp"

namespace lenticolor {

enum class DemosaicMethod { Nearest, Linear, Cubic, Convex, ConvexExternal };

inline const char* demosaic_method_name(DemosaicMethod m) {
    switch (m) {
        case DemosaicMethod::Nearest: return "nearest";
        case DemosaicMethod::Linear: return "linear";
        case DemosaicMethod::Cubic: return "cubic";
        case DemosaicMethod::Convex: return "convex";
        case DemosaicMethod::ConvexExternal: return "convex-external";
    }
    return "?";
}

struct PipelineConfig {
    double detect_scale = 1.0;
    FitConfig fit;
    ExtractConfig extract;
    DemosaicMethod demosaic = DemosaicMethod::Convex;
    std::string coeff_path;         // LFR coeff tensor for ConvexExternal
    std::string external_map_path;  // pre-computed likelihood map, skips the detector
    bool use_color_matrix = true;
    ColorMatrix color_matrix = lenticular_to_adobe_matrix();
    bool clamp_output = true;
    bool output_gamma = false;
};

struct PipelineResult {
    RGBRaster image;
    WidthEstimate width;
    FitReport fit_report;
    LenticuleGrid grid;
    size_t clipped_pixels = 0;
    double detect_seconds = 0.0;
    double fit_seconds = 0.0;
    double extract_seconds = 0.0;
    double demosaic_seconds = 0.0;
    double total_seconds = 0.0;
};

inline RGBRaster demosaic_stripe(const StripeImage& stripe, DemosaicMethod method,
                                 const CoeffTensor* tensor = nullptr) {
    switch (method) {
        case DemosaicMethod::Nearest: return fill_baseline(stripe, FillKind::Nearest);
        case DemosaicMethod::Linear: return fill_baseline(stripe, FillKind::Linear);
        case DemosaicMethod::Cubic: return fill_baseline(stripe, FillKind::Cubic);
        case DemosaicMethod::Convex:
            return fill_convex(stripe, WeightSource::analytic(ConvexKernel::ConvexCubic));
        case DemosaicMethod::ConvexExternal:
            if (!tensor)
                throw Error(ErrorCode::BadConfig, "convex-external needs a coeff tensor");
            return fill_convex(stripe, WeightSource::from_tensor(*tensor));
    }
    throw Error(ErrorCode::BadConfig, "unknown demosaic method");
}

inline PipelineResult run_single(const GrayRaster& scan, const PipelineConfig& cfg,
                                 const LikelihoodMap* external_map = nullptr) {
    using clock = std::chrono::steady_clock;
    auto secs = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    PipelineResult res;
    auto t0 = clock::now();

    LikelihoodMap map;
    if (external_map) {
        if (external_map->height != scan.height || external_map->width != scan.width)
            throw Error(ErrorCode::DimensionMismatch, "external map dims differ from scan");
        map = *external_map;
    } else if (!cfg.external_map_path.empty()) {
        map = read_likelihood(cfg.external_map_path,
                              ExpectedDims{static_cast<uint32_t>(scan.height),
                                           static_cast<uint32_t>(scan.width)});
    } else {
        map = detect_ridges(scan, cfg.detect_scale);
    }
    res.width = estimate_width(map);
    auto t1 = clock::now();
    res.detect_seconds = secs(t0, t1);

    FitConfig fit_cfg = cfg.fit;
    fit_cfg.width_hint = res.width.w_hat;
    LenticuleGrid init = init_grid(map, res.width);
    auto [grid, report] = refine_grid(map, init, fit_cfg);
    res.grid = grid;
    res.fit_report = report;
    auto t2 = clock::now();
    res.fit_seconds = secs(t1, t2);

    StripeImage stripe = extract_stripes(scan, grid, cfg.extract);
    stripe = median_filter_vertical(stripe, cfg.extract.median_k);
    stripe = resample_vertical(stripe, cfg.extract.resample_filter);
    auto t3 = clock::now();
    res.extract_seconds = secs(t2, t3);

    std::optional<CoeffTensor> tensor;
    if (cfg.demosaic == DemosaicMethod::ConvexExternal)
        tensor = read_coeff_tensor(cfg.coeff_path,
                                   ExpectedDims{static_cast<uint32_t>(stripe.height),
                                                static_cast<uint32_t>(stripe.width)});
    RGBRaster rgb = demosaic_stripe(stripe, cfg.demosaic, tensor ? &*tensor : nullptr);
    auto t4 = clock::now();
    res.demosaic_seconds = secs(t3, t4);

    if (cfg.use_color_matrix)
        rgb = apply_matrix(rgb, cfg.color_matrix, cfg.clamp_output, &res.clipped_pixels);
    if (cfg.output_gamma)
        rgb = apply_gamma(rgb);
    res.image = std::move(rgb);
    res.total_seconds = secs(t0, clock::now());
    return res;
}

inline std::string format_report(const std::string& input, const PipelineResult& r) {
    std::ostringstream os;
    os << "input: " << input << "\n"
       << "width_estimate_px: " << r.width.w_hat << "\n"
       << "width_confidence: " << r.width.confidence << "\n"
       << "boundaries: " << r.grid.boundary_count() << "\n"
       << "fit_objective: " << r.fit_report.objective << "\n"
       << "fit_data_term: " << r.fit_report.data_term << "\n"
       << "fit_r1: " << r.fit_report.r1 << "\n"
       << "fit_r2: " << r.fit_report.r2 << "\n"
       << "fit_iterations: " << r.fit_report.iterations << "\n"
       << "fit_converged: " << (r.fit_report.converged ? "yes" : "no") << "\n"
       << "clipped_values: " << r.clipped_pixels << "\n"
       << "detect_seconds: " << r.detect_seconds << "\n"
       << "fit_seconds: " << r.fit_seconds << "\n"
       << "extract_seconds: " << r.extract_seconds << "\n"
       << "demosaic_seconds: " << r.demosaic_seconds << "\n"
       << "total_seconds: " << r.total_seconds << "\n";
    return os.str();
}

// Diagnostic overlay: fitted lines blended into the scan at 50%.
inline RGBRaster render_overlay(const GrayRaster& scan, const LenticuleGrid& grid) {
    if (grid.image_height != scan.height || grid.image_width != scan.width)
        throw Error(ErrorCode::DimMismatch, "grid dims differ from scan");
    RGBRaster out(scan.height, scan.width);
    for (int h = 0; h < scan.height; ++h)
        for (int w = 0; w < scan.width; ++w)
            for (int c = 0; c < 3; ++c) out.at(h, w, c) = scan.at(h, w);
    for (int m = 0; m < grid.boundary_count(); ++m)
        for (int h = 0; h < scan.height; ++h) {
            int x = static_cast<int>(std::lround(grid.x_at(m, h)));
            if (x < 0 || x >= scan.width) continue;
            out.at(h, x, 0) = 0.5f * out.at(h, x, 0) + 0.5f;
            out.at(h, x, 1) = 0.5f * out.at(h, x, 1);
            out.at(h, x, 2) = 0.5f * out.at(h, x, 2);
        }
    return out;
}

}  // namespace lenticolor
