#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fgmatte/closedform.hpp"
#include "fgmatte/colorspace.hpp"
#include "fgmatte/image.hpp"
#include "fgmatte/metrics.hpp"
#include "fgmatte/multilevel.hpp"
#include "fgmatte/png_io.hpp"

namespace py = pybind11;
using namespace fgmatte;

namespace {

// Images cross the boundary as float64 numpy arrays: (h, w) or (h, w, 1)
// for single-channel, (h, w, 3) for RGB; alpha mattes as (h, w).

Image image_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    const auto info = arr.request();
    int channels = 1;
    if (info.ndim == 3)
        channels = int(info.shape[2]);
    else if (info.ndim != 2)
        throw std::invalid_argument("image array must have 2 or 3 dimensions");
    if (channels != 1 && channels != 3) throw std::invalid_argument("image must have 1 or 3 channels");

    const int h = int(info.shape[0]);
    const int w = int(info.shape[1]);
    Image img(w, h, channels);
    const double* src = static_cast<const double*>(info.ptr);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                img.at(x, y, c) = clamp01(src[(std::size_t(y) * w + x) * channels + c]);
    return img;
}

py::array_t<double> image_to_array(const Image& img) {
    const int h = img.height(), w = img.width(), ch = img.channels();
    if (ch == 1) {
        py::array_t<double> out({h, w});
        std::copy(img.plane(0), img.plane(0) + img.pixel_count(), out.mutable_data());
        return out;
    }
    py::array_t<double> out({h, w, ch});
    double* dst = out.mutable_data();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) dst[(std::size_t(y) * w + x) * ch + c] = img.at(x, y, c);
    return out;
}

AlphaMatte alpha_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    const auto info = arr.request();
    if (info.ndim != 2) throw std::invalid_argument("alpha array must have 2 dimensions");
    const int h = int(info.shape[0]);
    const int w = int(info.shape[1]);
    AlphaMatte alpha(w, h);
    const double* src = static_cast<const double*>(info.ptr);
    for (std::size_t i = 0; i < alpha.data().size(); ++i) alpha.data()[i] = clamp01(src[i]);
    return alpha;
}

py::array_t<double> alpha_to_array(const AlphaMatte& alpha) {
    py::array_t<double> out({alpha.height(), alpha.width()});
    std::copy(alpha.data().begin(), alpha.data().end(), out.mutable_data());
    return out;
}

using Arr = py::array_t<double, py::array::c_style | py::array::forcecast>;

MlParams ml_params(double omega, double eps_r, int low_res_threshold, int iters_low, int iters_high) {
    MlParams p;
    p.omega = omega;
    p.eps_r = eps_r;
    p.low_res_threshold = low_res_threshold;
    p.iters_low = iters_low;
    p.iters_high = iters_high;
    return p;
}

} // namespace

PYBIND11_MODULE(_fgmatte, m) {
    m.doc() = "foreground/background color estimation for alpha mattes";

    m.def(
        "compose",
        [](const Arr& fg, const Arr& bg, const Arr& alpha) {
            return image_to_array(compose(image_from_array(fg), image_from_array(bg), alpha_from_array(alpha)));
        },
        py::arg("fg"), py::arg("bg"), py::arg("alpha"),
        "Composite fg over bg: alpha * fg + (1 - alpha) * bg.");

    m.def(
        "compose_naive",
        [](const Arr& image, const Arr& bg, const Arr& alpha) {
            return image_to_array(
                compose_naive(image_from_array(image), image_from_array(bg), alpha_from_array(alpha)));
        },
        py::arg("image"), py::arg("bg"), py::arg("alpha"),
        "Composite with the raw image standing in for the foreground.");

    m.def(
        "resize",
        [](const Arr& arr, int width, int height) {
            const auto info = arr.request();
            if (info.ndim == 2) return alpha_to_array(resize(alpha_from_array(arr), width, height));
            return image_to_array(resize(image_from_array(arr), width, height));
        },
        py::arg("array"), py::arg("width"), py::arg("height"),
        "Bilinear resize with edge-clamped, center-aligned sampling.");

    m.def(
        "level_schedule",
        [](int width, int height, double omega, double eps_r, int low_res_threshold, int iters_low,
           int iters_high) {
            const LevelSchedule s = level_schedule(
                width, height, ml_params(omega, eps_r, low_res_threshold, iters_low, iters_high));
            std::vector<std::tuple<int, int, int>> out;
            for (const LevelSpec& level : s.levels) out.emplace_back(level.width, level.height, level.iterations);
            return out;
        },
        py::arg("width"), py::arg("height"), py::arg("omega") = 0.1, py::arg("eps_r") = 5e-3,
        py::arg("low_res_threshold") = 32, py::arg("iters_low") = 10, py::arg("iters_high") = 2,
        "List of (width, height, iterations) from coarse to full size.");

    m.def(
        "solve_pixel",
        [](double alpha_i, std::array<double, 3> intensity, std::vector<double> neighbor_alphas,
           std::vector<std::array<double, 3>> neighbor_fg, std::vector<std::array<double, 3>> neighbor_bg,
           double omega, double eps_r) {
            MlParams p;
            p.omega = omega;
            p.eps_r = eps_r;
            const PixelSolution s =
                solve_pixel(alpha_i, intensity, neighbor_alphas, neighbor_fg, neighbor_bg, p);
            return std::make_pair(s.fg, s.bg);
        },
        py::arg("alpha_i"), py::arg("intensity"), py::arg("neighbor_alphas"), py::arg("neighbor_fg"),
        py::arg("neighbor_bg"), py::arg("omega") = 0.1, py::arg("eps_r") = 5e-3,
        "Solve the local 2x2 system for one pixel; returns (fg, bg) clamped to [0, 1].");

    m.def(
        "ml_foreground_background",
        [](const Arr& image, const Arr& alpha, double omega, double eps_r, int low_res_threshold,
           int iters_low, int iters_high) {
            auto [fg, bg] = ml_foreground_background(
                image_from_array(image), alpha_from_array(alpha),
                ml_params(omega, eps_r, low_res_threshold, iters_low, iters_high));
            return std::make_pair(image_to_array(fg), image_to_array(bg));
        },
        py::arg("image"), py::arg("alpha"), py::arg("omega") = 0.1, py::arg("eps_r") = 5e-3,
        py::arg("low_res_threshold") = 32, py::arg("iters_low") = 10, py::arg("iters_high") = 2,
        "Multi-level foreground/background color estimation; returns (fg, bg).");

    m.def(
        "cf_foreground_background",
        [](const Arr& image, const Arr& alpha, double eps_cf, double residual_tol, std::int64_t max_iters,
           double ic_drop_tol, int ic_max_row_entries) {
            CfParams p;
            p.eps_cf = eps_cf;
            p.residual_tol = residual_tol;
            p.max_iters = max_iters;
            p.ic_drop_tol = ic_drop_tol;
            p.ic_max_row_entries = ic_max_row_entries;
            const CfSolution sol = cf_foreground_background_full(image_from_array(image), alpha_from_array(alpha), p);
            py::dict report;
            report["iterations"] = sol.report.iterations;
            report["final_residual"] = sol.report.final_residual;
            report["ic_breakdown"] = sol.report.ic_breakdown;
            return py::make_tuple(image_to_array(sol.fg), image_to_array(sol.bg), report);
        },
        py::arg("image"), py::arg("alpha"), py::arg("eps_cf") = 1e-5, py::arg("residual_tol") = 1e-6,
        py::arg("max_iters") = 0, py::arg("ic_drop_tol") = 1e-4, py::arg("ic_max_row_entries") = 64,
        "Closed-form global solver (IC-preconditioned CG); returns (fg, bg, report).");

    m.def(
        "sad",
        [](const Arr& est, const Arr& gt, const Arr& alpha) {
            return sad(image_from_array(est), image_from_array(gt), alpha_from_array(alpha));
        },
        py::arg("est"), py::arg("gt"), py::arg("alpha"),
        "Alpha-weighted sum of absolute differences over the translucent region.");

    m.def(
        "mse",
        [](const Arr& est, const Arr& gt, const Arr& alpha) {
            return mse(image_from_array(est), image_from_array(gt), alpha_from_array(alpha));
        },
        py::arg("est"), py::arg("gt"), py::arg("alpha"),
        "Alpha-weighted sum of squared differences over the translucent region.");

    m.def(
        "grad_error",
        [](const Arr& est, const Arr& gt, const Arr& alpha, double sigma, int kernel_radius) {
            GradParams p;
            p.sigma = sigma;
            p.kernel_radius = kernel_radius;
            return grad_error(image_from_array(est), image_from_array(gt), alpha_from_array(alpha), p);
        },
        py::arg("est"), py::arg("gt"), py::arg("alpha"), py::arg("sigma") = 1.4,
        py::arg("kernel_radius") = 0, "Alpha-weighted Gaussian-derivative gradient error.");

    m.def(
        "gaussian_derivative_kernel",
        [](double sigma, int radius) {
            const std::vector<double> k = gaussian_derivative_kernel(sigma, radius);
            py::array_t<double> out(py::ssize_t(k.size()));
            std::copy(k.begin(), k.end(), out.mutable_data());
            return out;
        },
        py::arg("sigma") = 1.4, py::arg("radius") = 6);

    m.def(
        "srgb_to_linear",
        [](const Arr& srgb, double gamma) {
            return image_to_array(srgb_to_linear(image_from_array(srgb), GammaParams{gamma}));
        },
        py::arg("srgb"), py::arg("gamma") = 2.0);
    m.def(
        "linear_to_srgb",
        [](const Arr& linear, double gamma) {
            return image_to_array(linear_to_srgb(image_from_array(linear), GammaParams{gamma}));
        },
        py::arg("linear"), py::arg("gamma") = 2.0);
    m.def(
        "srgb_to_linear_value", [](double s, double gamma) { return srgb_to_linear(s, GammaParams{gamma}); },
        py::arg("s"), py::arg("gamma") = 2.0);
    m.def(
        "linear_to_srgb_value", [](double l, double gamma) { return linear_to_srgb(l, GammaParams{gamma}); },
        py::arg("l"), py::arg("gamma") = 2.0);

    m.def(
        "fit_white_point",
        [](const Arr& source, const Arr& target) {
            const WhitePointFit fit = fit_white_point(image_from_array(source), image_from_array(target));
            py::array_t<double> mat({3, 3});
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) mat.mutable_at(r, c) = fit.m[std::size_t(r)][std::size_t(c)];
            return py::make_tuple(mat, fit.residual);
        },
        py::arg("source"), py::arg("target"),
        "Least-squares 3x3 color transform; returns (M, residual).");

    m.def(
        "apply_white_point",
        [](const Arr& image, const Arr& matrix) {
            const auto info = matrix.request();
            if (info.ndim != 2 || info.shape[0] != 3 || info.shape[1] != 3)
                throw std::invalid_argument("matrix must be 3x3");
            WhitePointFit fit;
            const double* p = static_cast<const double*>(info.ptr);
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) fit.m[std::size_t(r)][std::size_t(c)] = p[r * 3 + c];
            return image_to_array(apply_white_point(image_from_array(image), fit));
        },
        py::arg("image"), py::arg("matrix"));

    m.def(
        "prepare_ground_truth",
        [](const Arr& fg_linear, const Arr& img_linear, const Arr& img_srgb_wp, double gamma) {
            const GroundTruthPair out =
                prepare_ground_truth(image_from_array(fg_linear), image_from_array(img_linear),
                                     image_from_array(img_srgb_wp), GammaParams{gamma});
            py::array_t<double> mat({3, 3});
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) mat.mutable_at(r, c) = out.fit.m[std::size_t(r)][std::size_t(c)];
            return py::make_tuple(image_to_array(out.fg_gt), image_to_array(out.img_input), mat,
                                  out.fit.residual);
        },
        py::arg("fg_linear"), py::arg("img_linear"), py::arg("img_srgb_wp"), py::arg("gamma") = 2.0,
        "White-point-corrected ground truth; returns (fg_gt, img_input, M, residual).");

    m.def(
        "load_png",
        [](const std::string& path) {
            PngData data = load_png(path);
            py::object alpha = py::none();
            if (data.alpha) alpha = alpha_to_array(*data.alpha);
            return py::make_tuple(image_to_array(data.color), alpha, data.bit_depth);
        },
        py::arg("path"), "Load a PNG; returns (color, alpha_or_None, bit_depth).");

    m.def(
        "save_png",
        [](const std::string& path, const Arr& arr, int bit_depth) {
            const auto info = arr.request();
            if (info.ndim == 2) {
                save_png(path, alpha_from_array(arr), bit_depth);
            } else {
                save_png(path, image_from_array(arr), bit_depth);
            }
        },
        py::arg("path"), py::arg("array"), py::arg("bit_depth") = 16);

    m.attr("__version__") = "0.1.0";
}
