// Batch CLI for lenticular film color reconstruction.

#include <CLI11.hpp>
#include <glob.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "lenticolor/grid_io.hpp"
#include "lenticolor/image_io.hpp"
#include "lenticolor/lfr_io.hpp"
#include "lenticolor/pipeline.hpp"
#include "lenticolor/simulate.hpp"

namespace fs = std::filesystem;
using namespace lenticolor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 1;
constexpr int kExitConfigError = 2;

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
    std::vector<std::string> files;
    for (const auto& p : patterns) {
        if (fs::is_directory(p)) {
            for (const auto& e : fs::directory_iterator(p)) {
                auto ext = e.path().extension().string();
                if (ext == ".png" || ext == ".tif" || ext == ".tiff")
                    files.push_back(e.path().string());
            }
        } else if (p.find_first_of("*?[") != std::string::npos) {
            glob_t g{};
            if (glob(p.c_str(), 0, nullptr, &g) == 0)
                for (size_t i = 0; i < g.gl_pathc; ++i) files.emplace_back(g.gl_pathv[i]);
            globfree(&g);
        } else {
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::array<int, 3> parse_channel_order(const std::string& s) {
    if (s.size() != 3)
        throw Error(ErrorCode::BadConfig, "channel order must be a permutation of RGB");
    std::array<int, 3> order{};
    for (int i = 0; i < 3; ++i) {
        switch (std::toupper(static_cast<unsigned char>(s[i]))) {
            case 'R': order[i] = 0; break;
            case 'G': order[i] = 1; break;
            case 'B': order[i] = 2; break;
            default: throw Error(ErrorCode::BadConfig, "channel order must use R, G, B");
        }
    }
    std::array<int, 3> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 3>{0, 1, 2})
        throw Error(ErrorCode::BadConfig, "channel order must be a permutation of RGB");
    return order;
}

DemosaicMethod parse_demosaic(const std::string& s, bool has_coeff) {
    if (s == "nearest") return DemosaicMethod::Nearest;
    if (s == "linear") return DemosaicMethod::Linear;
    if (s == "cubic") return DemosaicMethod::Cubic;
    if (s == "convex") return has_coeff ? DemosaicMethod::ConvexExternal : DemosaicMethod::Convex;
    throw Error(ErrorCode::BadConfig, "unknown demosaic method: " + s);
}

struct CommonOpts {
    double scale = 1.0;
    double lambda1 = 1.0;
    double lambda2 = 10.0;
    int max_iters = 200;
    double grad_tol = 1e-6;
    double smooth_sigma = 1.0;
    double margin = 0.1;
    int median_k = 3;
    std::string channel_order = "RGB";
    std::string resample = "linear";
    std::string demosaic = "convex";
    std::string coeff_path;
    std::string matrix = "builtin";
    std::string external_map;
    bool no_color = false;
    bool no_clamp = false;
    bool gamma = false;
};

void add_common_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--scale", o.scale, "Ridge detector scale, px");
    cmd->add_option("--lambda1", o.lambda1, "Width-deviation regularizer weight");
    cmd->add_option("--lambda2", o.lambda2, "Width-smoothness regularizer weight");
    cmd->add_option("--max-iters", o.max_iters, "Solver iteration cap");
    cmd->add_option("--grad-tol", o.grad_tol, "Gradient infinity-norm stop");
    cmd->add_option("--smooth-sigma", o.smooth_sigma, "Horizontal map pre-smoothing, px");
    cmd->add_option("--margin", o.margin, "Band margin fraction");
    cmd->add_option("--median-k", o.median_k, "Vertical median window (odd)");
    cmd->add_option("--channel-order", o.channel_order, "Left-to-right channel order, e.g. RGB");
    cmd->add_option("--resample", o.resample, "Vertical resample filter: nearest|linear");
    cmd->add_option("--demosaic", o.demosaic, "Demosaic method: nearest|linear|cubic|convex");
    cmd->add_option("--coeff", o.coeff_path, "External coefficient tensor (LFR) for convex");
    cmd->add_option("--matrix", o.matrix, "Color matrix: 'builtin' or a text file path");
    cmd->add_option("--map", o.external_map, "External likelihood map (LFR), skips detector");
    cmd->add_flag("--no-color", o.no_color, "Skip the color space conversion");
    cmd->add_flag("--no-clamp", o.no_clamp, "Do not clamp converted values to [0,1]");
    cmd->add_flag("--gamma", o.gamma, "Apply destination gamma encoding");
}

PipelineConfig make_pipeline_config(const CommonOpts& o) {
    PipelineConfig cfg;
    cfg.detect_scale = o.scale;
    cfg.fit.lambda1 = o.lambda1;
    cfg.fit.lambda2 = o.lambda2;
    cfg.fit.max_iters = o.max_iters;
    cfg.fit.grad_tol = o.grad_tol;
    cfg.fit.smooth_sigma = o.smooth_sigma;
    cfg.extract.boundary_margin = o.margin;
    cfg.extract.median_k = o.median_k;
    cfg.extract.channel_order = parse_channel_order(o.channel_order);
    cfg.extract.resample_filter =
        (o.resample == "nearest") ? ResampleFilter::Nearest : ResampleFilter::Linear;
    cfg.demosaic = parse_demosaic(o.demosaic, !o.coeff_path.empty());
    cfg.coeff_path = o.coeff_path;
    cfg.external_map_path = o.external_map;
    cfg.use_color_matrix = !o.no_color;
    if (o.matrix != "builtin") cfg.color_matrix = read_matrix(o.matrix);
    cfg.clamp_output = !o.no_clamp;
    cfg.output_gamma = o.gamma;
    return cfg;
}

int run_pipeline_cmd(const std::vector<std::string>& inputs, const std::string& out_dir,
                     const CommonOpts& opts, int jobs) {
    PipelineConfig cfg = make_pipeline_config(opts);
    std::vector<std::string> files = expand_inputs(inputs);
    if (files.empty()) {
        std::cerr << "error: no input images\n";
        return kExitConfigError;
    }
    fs::create_directories(out_dir);

    std::atomic<size_t> next{0};
    std::atomic<int> failures{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= files.size()) break;
            const std::string& path = files[i];
            std::string stem = fs::path(path).stem().string();
            try {
                GrayRaster scan = load_gray(path);
                PipelineResult res = run_single(scan, cfg);
                save_rgb16((fs::path(out_dir) / (stem + ".rgb.png")).string(), res.image);
                std::ofstream rep(fs::path(out_dir) / (stem + ".report.txt"));
                rep << format_report(path, res);
                std::lock_guard<std::mutex> lk(log_mutex);
                std::cout << "ok: " << path << " (w=" << res.width.w_hat
                          << ", M=" << res.grid.boundary_count() << ")\n";
            } catch (const std::exception& e) {
                ++failures;
                std::lock_guard<std::mutex> lk(log_mutex);
                std::cerr << "failed: " << path << ": " << e.what() << "\n";
            }
        }
    };

    jobs = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    int failed = failures.load();
    std::cout << (files.size() - failed) << "/" << files.size() << " images processed\n";
    return failed ? kExitPartialFailure : kExitOk;
}

int run_simulate_cmd(const std::string& corpus, const std::string& out_dir, int count,
                     uint64_t seed, const SimParams& base) {
    std::vector<std::string> sources = expand_inputs({corpus});
    if (sources.empty())
        throw Error(ErrorCode::CorpusEmpty, "no RGB images in corpus: " + corpus);
    fs::create_directories(out_dir);

    for (int i = 0; i < count; ++i) {
        RGBRaster src = load_rgb(sources[i % sources.size()]);
        SimParams p = base;
        p.seed = seed + static_cast<uint64_t>(i);
        SimScene scene = render_scan(src, p);

        char name[32];
        std::snprintf(name, sizeof(name), "scene_%03d", i);
        fs::path dir = fs::path(out_dir) / name;
        fs::create_directories(dir);
        save_gray16((dir / "scan.png").string(), scene.scan);
        save_rgb16((dir / "source.png").string(), scene.source);
        write_grid((dir / "grid.lgrid").string(), scene.truth_grid);

        std::ofstream params(dir / "params.txt");
        params << "mean_width=" << p.mean_width << "\n"
               << "width_mod_amplitude=" << p.width_mod_amplitude << "\n"
               << "width_mod_period=" << p.width_mod_period << "\n"
               << "tilt_degrees=" << p.tilt_degrees << "\n"
               << "boundary_width=" << p.boundary_width << "\n"
               << "boundary_depth=" << p.boundary_depth << "\n"
               << "noise_sigma=" << p.noise_sigma << "\n"
               << "seed=" << p.seed << "\n"
               << "source=" << sources[i % sources.size()] << "\n";
        std::cout << "wrote " << dir.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Truthful color reconstruction of grayscale lenticular film scans"};
    app.require_subcommand(1);
    if (const char* env = std::getenv("LENTICOLOR_CONFIG"))
        app.set_config("--config", env, "Config file (key=value)", false);
    else
        app.set_config("--config", "", "Config file (key=value)", false);

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Run the full reconstruction on a batch");
    std::vector<std::string> pipe_inputs;
    std::string pipe_out = ".";
    int pipe_jobs = 1;
    CommonOpts pipe_opts;
    pipe->add_option("inputs", pipe_inputs, "Input scans (files, dirs, globs)")->required();
    pipe->add_option("-o,--out-dir", pipe_out, "Output directory");
    pipe->add_option("-j,--jobs", pipe_jobs, "Parallel workers");
    add_common_options(pipe, pipe_opts);

    // detect
    auto* det = app.add_subcommand("detect", "Ridge detection to a likelihood map");
    std::string det_in, det_out;
    double det_scale = 1.0;
    det->add_option("input", det_in)->required();
    det->add_option("-o,--out", det_out, "Output LFR likelihood map")->required();
    det->add_option("--scale", det_scale);

    // fit
    auto* fit = app.add_subcommand("fit", "Fit the lenticule grid from a likelihood map");
    std::string fit_map, fit_out;
    CommonOpts fit_opts;
    fit->add_option("input", fit_map, "Likelihood map (LFR)")->required();
    fit->add_option("-o,--out", fit_out, "Output LGRID file")->required();
    add_common_options(fit, fit_opts);

    // extract
    auto* ext = app.add_subcommand("extract", "Extract, denoise and resample the stripe image");
    std::string ext_in, ext_grid, ext_out;
    CommonOpts ext_opts;
    ext->add_option("input", ext_in, "Input scan")->required();
    ext->add_option("-g,--grid", ext_grid, "Fitted LGRID file")->required();
    ext->add_option("-o,--out", ext_out, "Output 16-bit stripe PNG")->required();
    add_common_options(ext, ext_opts);

    // demosaic
    auto* dem = app.add_subcommand("demosaic", "Fill missing channels of a stripe image");
    std::string dem_in, dem_out;
    CommonOpts dem_opts;
    dem->add_option("input", dem_in, "Stripe PNG")->required();
    dem->add_option("-o,--out", dem_out, "Output RGB PNG")->required();
    add_common_options(dem, dem_opts);

    // convert-color
    auto* conv = app.add_subcommand("convert-color", "Apply the color space conversion");
    std::string conv_in, conv_out;
    CommonOpts conv_opts;
    conv->add_option("input", conv_in)->required();
    conv->add_option("-o,--out", conv_out)->required();
    add_common_options(conv, conv_opts);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Render synthetic scenes from an RGB corpus");
    std::string sim_corpus, sim_out = ".";
    int sim_count = 1;
    uint64_t sim_seed = 0;
    SimParams sim_params;
    sim->add_option("--corpus", sim_corpus, "Directory of RGB images")->required();
    sim->add_option("-o,--out-dir", sim_out, "Output directory");
    sim->add_option("-n,--count", sim_count, "Number of scenes");
    sim->add_option("--seed", sim_seed, "Base seed");
    sim->add_option("--mean-width", sim_params.mean_width);
    sim->add_option("--width-mod-amplitude", sim_params.width_mod_amplitude);
    sim->add_option("--width-mod-period", sim_params.width_mod_period);
    sim->add_option("--tilt", sim_params.tilt_degrees);
    sim->add_option("--boundary-width", sim_params.boundary_width);
    sim->add_option("--boundary-depth", sim_params.boundary_depth);
    sim->add_option("--noise-sigma", sim_params.noise_sigma);
    sim->add_option("--gain-jitter", sim_params.gain_jitter);
    sim->add_option("--offset-jitter", sim_params.offset_jitter);

    // overlay
    auto* ovl = app.add_subcommand("overlay", "Blend fitted boundaries into the scan");
    std::string ovl_in, ovl_grid, ovl_out;
    ovl->add_option("input", ovl_in)->required();
    ovl->add_option("-g,--grid", ovl_grid)->required();
    ovl->add_option("-o,--out", ovl_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*pipe) return run_pipeline_cmd(pipe_inputs, pipe_out, pipe_opts, pipe_jobs);

        if (*det) {
            GrayRaster scan = load_gray(det_in);
            write_raster(det_out, detect_ridges(scan, det_scale));
            return kExitOk;
        }
        if (*fit) {
            LikelihoodMap map = read_likelihood(fit_map);
            WidthEstimate w = estimate_width(map);
            FitConfig cfg;
            cfg.lambda1 = fit_opts.lambda1;
            cfg.lambda2 = fit_opts.lambda2;
            cfg.max_iters = fit_opts.max_iters;
            cfg.grad_tol = fit_opts.grad_tol;
            cfg.smooth_sigma = fit_opts.smooth_sigma;
            cfg.width_hint = w.w_hat;
            auto [grid, report] = refine_grid(map, init_grid(map, w), cfg);
            write_grid(fit_out, grid);
            std::cout << "w_hat=" << w.w_hat << " M=" << grid.boundary_count()
                      << " objective=" << report.objective << "\n";
            return kExitOk;
        }
        if (*ext) {
            GrayRaster scan = load_gray(ext_in);
            LenticuleGrid grid = read_grid(ext_grid);
            ExtractConfig cfg;
            cfg.boundary_margin = ext_opts.margin;
            cfg.median_k = ext_opts.median_k;
            cfg.channel_order = parse_channel_order(ext_opts.channel_order);
            cfg.resample_filter = (ext_opts.resample == "nearest") ? ResampleFilter::Nearest
                                                                   : ResampleFilter::Linear;
            StripeImage s = extract_stripes(scan, grid, cfg);
            s = median_filter_vertical(s, cfg.median_k);
            s = resample_vertical(s, cfg.resample_filter);
            save_stripe16(ext_out, s);
            return kExitOk;
        }
        if (*dem) {
            StripeImage s = load_stripe16(dem_in, 0, 0, parse_channel_order(dem_opts.channel_order));
            DemosaicMethod method = parse_demosaic(dem_opts.demosaic, !dem_opts.coeff_path.empty());
            std::optional<CoeffTensor> tensor;
            if (method == DemosaicMethod::ConvexExternal)
                tensor = read_coeff_tensor(dem_opts.coeff_path,
                                           ExpectedDims{static_cast<uint32_t>(s.height),
                                                        static_cast<uint32_t>(s.width)});
            save_rgb16(dem_out, demosaic_stripe(s, method, tensor ? &*tensor : nullptr));
            return kExitOk;
        }
        if (*conv) {
            RGBRaster img = load_rgb(conv_in);
            ColorMatrix m = (conv_opts.matrix == "builtin") ? lenticular_to_adobe_matrix()
                                                                  : read_matrix(conv_opts.matrix);
            size_t clipped = 0;
            RGBRaster out = apply_matrix(img, m, !conv_opts.no_clamp, &clipped);
            if (conv_opts.gamma) out = apply_gamma(out);
            save_rgb16(conv_out, out);
            std::cout << "clipped_values: " << clipped << "\n";
            return kExitOk;
        }
        if (*sim) return run_simulate_cmd(sim_corpus, sim_out, sim_count, sim_seed, sim_params);
        if (*ovl) {
            GrayRaster scan = load_gray(ovl_in);
            LenticuleGrid grid = read_grid(ovl_grid);
            save_rgb16(ovl_out, render_overlay(scan, grid));
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (e.code() == ErrorCode::BadConfig || e.code() == ErrorCode::CorpusEmpty)
                   ? kExitConfigError
                   : kExitPartialFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
    return kExitConfigError;
}
