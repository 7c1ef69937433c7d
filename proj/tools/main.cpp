// fgmatte: foreground/background color estimation for alpha mattes.
//
// Exit codes: 0 success, 1 usage error, 2 I/O or input-data error,
// 3 solver failure.

#include <CLI11.hpp>

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fgmatte/closedform.hpp"
#include "fgmatte/colorspace.hpp"
#include "fgmatte/image.hpp"
#include "fgmatte/metrics.hpp"
#include "fgmatte/multilevel.hpp"
#include "fgmatte/png_io.hpp"

using namespace fgmatte;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitSolver = 3;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::int64_t peak_rss_bytes() {
    struct rusage usage{};
    if (getrusage(RUSAGE_SELF, &usage) != 0) return -1;
    return std::int64_t(usage.ru_maxrss) * 1024; // ru_maxrss is KiB on Linux
}

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

AlphaSource parse_alpha_source(const std::string& s) {
    if (s == "gray-png") return AlphaSource::GrayPng;
    if (s == "alpha-channel") return AlphaSource::AlphaChannel;
    throw CLI::ValidationError("--alpha-source must be gray-png or alpha-channel");
}

Image load_color_png(const std::string& path) {
    PngData data = load_png(path);
    return std::move(data.color);
}

Image require_rgb(Image img, const std::string& path) {
    if (img.channels() != 3)
        throw PngError(path + " must be an RGB PNG (got " + std::to_string(img.channels()) + " channel)");
    return img;
}

struct EstimateOpts {
    std::string image, alpha, out_fg, out_bg;
    std::string method = "multilevel";
    std::string alpha_source = "gray-png";
    int bits = 16;
    MlParams ml;
    CfParams cf;
};

int run_estimate(const EstimateOpts& opt) {
    const Image image = require_rgb(load_color_png(opt.image), opt.image);
    const AlphaMatte alpha = load_alpha_png(opt.alpha, parse_alpha_source(opt.alpha_source));

    std::printf("method=%s image=%dx%d omega=%g eps_r=%g", opt.method.c_str(), image.width(),
                image.height(), opt.ml.omega, opt.ml.eps_r);
    if (opt.method == "closedform")
        std::printf(" eps_cf=%g residual_tol=%g", opt.cf.eps_cf, opt.cf.residual_tol);
    std::printf("\n");

    Image fg, bg;
    const auto start = Clock::now();
    if (opt.method == "multilevel") {
        std::tie(fg, bg) = ml_foreground_background(image, alpha, opt.ml);
        std::printf("time_s=%.6f\n", seconds_since(start));
    } else {
        const CfSolution sol = cf_foreground_background_full(image, alpha, opt.cf);
        std::printf("time_s=%.6f\n", seconds_since(start));
        for (int c = 0; c < 3; ++c)
            std::printf("channel=%d iterations=%d residual=%.3e\n", c, sol.report.iterations[c],
                        sol.report.final_residual[c]);
        if (sol.report.ic_breakdown) std::printf("preconditioner=jacobi-fallback\n");
        fg = sol.fg;
        bg = sol.bg;
    }

    save_png(opt.out_fg, fg, opt.bits);
    if (!opt.out_bg.empty()) save_png(opt.out_bg, bg, opt.bits);
    return 0;
}

struct ComposeOpts {
    std::string fg, image, alpha, bg, out;
    std::vector<double> bg_color;
    std::string alpha_source = "gray-png";
    bool naive = false;
    int bits = 16;
};

int run_compose(const ComposeOpts& opt) {
    const std::string fg_path = opt.naive || opt.fg.empty() ? opt.image : opt.fg;
    const Image fg = load_color_png(fg_path);
    const AlphaMatte alpha = load_alpha_png(opt.alpha, parse_alpha_source(opt.alpha_source));

    Image bg;
    if (!opt.bg.empty()) {
        bg = load_color_png(opt.bg);
    } else {
        if (opt.bg_color.size() != 3)
            throw CLI::ValidationError("--bg-color needs exactly three values R,G,B");
        bg = Image(fg.width(), fg.height(), fg.channels());
        for (int c = 0; c < fg.channels(); ++c) {
            const double v = clamp01(opt.bg_color[fg.channels() == 1 ? 0 : std::size_t(c)]);
            std::fill(bg.plane(c), bg.plane(c) + bg.pixel_count(), v);
        }
    }

    const Image out = opt.naive ? compose_naive(fg, bg, alpha) : compose(fg, bg, alpha);
    save_png(opt.out, out, opt.bits);
    return 0;
}

struct MetricsOpts {
    std::string est, gt, alpha, csv;
    GradParams grad;
};

int run_metrics(const MetricsOpts& opt) {
    const Image est = load_color_png(opt.est);
    const Image gt = load_color_png(opt.gt);
    const AlphaMatte alpha = load_alpha_png(opt.alpha, AlphaSource::GrayPng);
    const MetricReport report = evaluate_metrics(est, gt, alpha, opt.grad);

    std::printf("sad=%.17g\nmse=%.17g\ngrad=%.17g\ntranslucent_pixels=%lld\n", report.sad, report.mse,
                report.grad, static_cast<long long>(report.translucent_pixel_count));
    const std::string record = g17(report.sad) + "," + g17(report.mse) + "," + g17(report.grad) + "," +
                               std::to_string(report.translucent_pixel_count);
    std::printf("csv: sad,mse,grad,translucent_pixel_count\ncsv: %s\n", record.c_str());
    if (!opt.csv.empty()) {
        std::ofstream out(opt.csv);
        if (!out) throw PngError("cannot open " + opt.csv + " for writing");
        out << "sad,mse,grad,translucent_pixel_count\n" << record << "\n";
    }
    return 0;
}

struct PrepOpts {
    std::string fg_linear, img_linear, img_srgb, out_fg, out_img;
    double gamma = 2.0;
};

int run_prep(const PrepOpts& opt) {
    const Image fg_linear = require_rgb(load_color_png(opt.fg_linear), opt.fg_linear);
    const Image img_linear = require_rgb(load_color_png(opt.img_linear), opt.img_linear);
    const Image img_srgb = require_rgb(load_color_png(opt.img_srgb), opt.img_srgb);

    const GroundTruthPair out = prepare_ground_truth(fg_linear, img_linear, img_srgb, GammaParams{opt.gamma});
    save_png(opt.out_fg, out.fg_gt, 16);
    save_png(opt.out_img, out.img_input, 16);

    std::printf("white_point_matrix:\n");
    for (int r = 0; r < 3; ++r)
        std::printf("  %.10f %.10f %.10f\n", out.fit.m[std::size_t(r)][0], out.fit.m[std::size_t(r)][1],
                    out.fit.m[std::size_t(r)][2]);
    std::printf("residual=%.17g\n", out.fit.residual);
    return 0;
}

struct BenchOpts {
    std::string image, alpha, csv;
    std::string alpha_source = "gray-png";
    std::vector<std::string> methods = {"multilevel", "closedform"};
    std::vector<double> sizes = {0.0625, 0.25, 1.0, 4.0};
    int reps = 3;
    double mem_limit_gb = 4.0;
};

// Rough per-pixel footprint of the closed-form solve (CSR + factor +
// work vectors), used only for the skip guard.
std::int64_t estimate_cf_bytes(std::int64_t pixels) { return pixels * 2600; }

int run_bench(const BenchOpts& opt) {
    const Image base = require_rgb(load_color_png(opt.image), opt.image);
    const AlphaMatte base_alpha = load_alpha_png(opt.alpha, parse_alpha_source(opt.alpha_source));
    if (base.width() != base_alpha.width() || base.height() != base_alpha.height())
        throw std::invalid_argument("bench: alpha size " + std::to_string(base_alpha.width()) + "x" +
                                    std::to_string(base_alpha.height()) + " does not match image size " +
                                    std::to_string(base.width()) + "x" + std::to_string(base.height()));

    std::ostringstream csv;
    csv << "width,height,megapixels,method,wall_time_s,repetitions,time_stddev_s,peak_rss_bytes\n";
    std::vector<std::string> skipped;

    for (double mp : opt.sizes) {
        const double target_px = mp * 1e6;
        const double scale = std::sqrt(target_px / (double(base.width()) * base.height()));
        const int w = std::max(1, int(std::lround(base.width() * scale)));
        const int h = std::max(1, int(std::lround(base.height() * scale)));
        const Image image = resize(base, w, h);
        const AlphaMatte alpha = resize(base_alpha, w, h);
        const double actual_mp = double(w) * h / 1e6;

        for (const std::string& method : opt.methods) {
            if (method == "closedform" &&
                estimate_cf_bytes(std::int64_t(w) * h) > std::int64_t(opt.mem_limit_gb * 1e9)) {
                const std::string why = "closedform at " + std::to_string(w) + "x" + std::to_string(h) +
                                        ": estimated footprint exceeds --mem-limit-gb " +
                                        std::to_string(opt.mem_limit_gb);
                std::fprintf(stderr, "skipped %s\n", why.c_str());
                skipped.push_back(why);
                continue;
            }

            std::vector<double> times;
            for (int rep = 0; rep < opt.reps; ++rep) {
                const auto start = Clock::now();
                if (method == "multilevel") {
                    auto result = ml_foreground_background(image, alpha);
                    (void)result;
                } else if (method == "closedform") {
                    auto result = cf_foreground_background(image, alpha);
                    (void)result;
                } else {
                    throw CLI::ValidationError("unknown method " + method);
                }
                times.push_back(seconds_since(start));
            }
            const double mean = std::accumulate(times.begin(), times.end(), 0.0) / double(times.size());
            double var = 0.0;
            for (double t : times) var += (t - mean) * (t - mean);
            const double stddev = times.size() > 1 ? std::sqrt(var / double(times.size() - 1)) : 0.0;

            csv << w << "," << h << "," << g17(actual_mp) << "," << method << "," << g17(mean) << ","
                << times.size() << "," << g17(stddev) << "," << peak_rss_bytes() << "\n";
            std::printf("%dx%d %s: %.4f s (stddev %.4f, reps %zu)\n", w, h, method.c_str(), mean, stddev,
                        times.size());
            std::fflush(stdout);
        }
    }
    for (const std::string& why : skipped) csv << "# skipped " << why << "\n";

    if (!opt.csv.empty()) {
        std::ofstream out(opt.csv);
        if (!out) throw PngError("cannot open " + opt.csv + " for writing");
        out << csv.str();
    } else {
        std::fputs(csv.str().c_str(), stdout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"foreground/background color estimation for alpha mattes"};
    app.require_subcommand(1);

    EstimateOpts est;
    CLI::App* estimate = app.add_subcommand("estimate", "estimate foreground and background colors");
    estimate->add_option("--image", est.image, "input image PNG")->required();
    estimate->add_option("--alpha", est.alpha, "alpha matte PNG")->required();
    estimate->add_option("--out-fg", est.out_fg, "output foreground PNG")->required();
    estimate->add_option("--out-bg", est.out_bg, "output background PNG");
    estimate->add_option("--method", est.method, "multilevel or closedform")
        ->check(CLI::IsMember({"multilevel", "closedform"}));
    estimate->add_option("--alpha-source", est.alpha_source)->check(CLI::IsMember({"gray-png", "alpha-channel"}));
    estimate->add_option("--omega", est.ml.omega, "alpha-gradient weight");
    estimate->add_option("--eps-r", est.ml.eps_r, "local regularization factor");
    estimate->add_option("--iters-low", est.ml.iters_low);
    estimate->add_option("--iters-high", est.ml.iters_high);
    estimate->add_option("--eps-cf", est.cf.eps_cf, "global gradient-weight regularizer");
    estimate->add_option("--residual-tol", est.cf.residual_tol, "closedform relative residual target");
    estimate->add_option("--bits", est.bits)->check(CLI::IsMember({8, 16}));

    ComposeOpts cmp;
    CLI::App* compose_cmd = app.add_subcommand("compose", "compose a foreground onto a background");
    auto* fg_opt = compose_cmd->add_option("--fg", cmp.fg, "estimated foreground PNG");
    auto* img_opt = compose_cmd->add_option("--image", cmp.image, "raw image PNG (naive compositing)");
    compose_cmd->add_option("--alpha", cmp.alpha, "alpha matte PNG")->required();
    auto* bg_opt = compose_cmd->add_option("--bg", cmp.bg, "background PNG");
    auto* bgc_opt = compose_cmd->add_option("--bg-color", cmp.bg_color, "solid background color R,G,B")
                        ->delimiter(',')
                        ->expected(3);
    compose_cmd->add_option("--out", cmp.out, "output PNG")->required();
    compose_cmd->add_flag("--naive", cmp.naive, "use the raw image in place of the foreground");
    compose_cmd->add_option("--alpha-source", cmp.alpha_source)
        ->check(CLI::IsMember({"gray-png", "alpha-channel"}));
    compose_cmd->add_option("--bits", cmp.bits)->check(CLI::IsMember({8, 16}));
    fg_opt->excludes(img_opt);
    bg_opt->excludes(bgc_opt);

    MetricsOpts met;
    CLI::App* metrics_cmd = app.add_subcommand("metrics", "alpha-weighted SAD/MSE/GRAD");
    metrics_cmd->add_option("--est", met.est, "estimated image PNG")->required();
    metrics_cmd->add_option("--gt", met.gt, "ground-truth image PNG")->required();
    metrics_cmd->add_option("--alpha", met.alpha, "ground-truth alpha PNG")->required();
    metrics_cmd->add_option("--sigma", met.grad.sigma, "Gaussian derivative sigma");
    metrics_cmd->add_option("--csv", met.csv, "write the record to this CSV file");

    PrepOpts prep;
    CLI::App* prep_cmd = app.add_subcommand("prep-dataset", "white-point-correct linear ground truth");
    prep_cmd->add_option("--fg-linear", prep.fg_linear)->required();
    prep_cmd->add_option("--img-linear", prep.img_linear)->required();
    prep_cmd->add_option("--img-srgb", prep.img_srgb)->required();
    prep_cmd->add_option("--out-fg", prep.out_fg)->required();
    prep_cmd->add_option("--out-img", prep.out_img)->required();
    prep_cmd->add_option("--gamma", prep.gamma);

    BenchOpts bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "runtime scaling over a size ladder");
    bench_cmd->add_option("--image", bench.image)->required();
    bench_cmd->add_option("--alpha", bench.alpha)->required();
    bench_cmd->add_option("--methods", bench.methods, "comma-separated list")->delimiter(',');
    bench_cmd->add_option("--sizes", bench.sizes, "target megapixels, comma-separated")->delimiter(',');
    bench_cmd->add_option("--reps", bench.reps)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--csv", bench.csv, "output CSV path");
    bench_cmd->add_option("--mem-limit-gb", bench.mem_limit_gb, "skip closedform beyond this footprint");
    bench_cmd->add_option("--alpha-source", bench.alpha_source)
        ->check(CLI::IsMember({"gray-png", "alpha-channel"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*estimate) return run_estimate(est);
        if (*compose_cmd) {
            if (cmp.fg.empty() && cmp.image.empty())
                throw CLI::ValidationError("compose needs --fg or --image");
            if (cmp.naive && cmp.image.empty())
                throw CLI::ValidationError("--naive composes the raw image; pass it via --image");
            if (cmp.bg.empty() && cmp.bg_color.empty())
                throw CLI::ValidationError("compose needs --bg or --bg-color");
            return run_compose(cmp);
        }
        if (*metrics_cmd) return run_metrics(met);
        if (*prep_cmd) return run_prep(prep);
        if (*bench_cmd) return run_bench(bench);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    } catch (const PngError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitUsage;
}
