#include "fgmatte/multilevel.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fgmatte {

void MlParams::validate() const {
    if (!(omega >= 0.0)) throw std::invalid_argument("MlParams: omega must be >= 0");
    if (!(eps_r > 0.0)) throw std::invalid_argument("MlParams: eps_r must be > 0");
    if (iters_low < 1 || iters_high < 1) throw std::invalid_argument("MlParams: iteration counts must be >= 1");
    if (low_res_threshold < 1) throw std::invalid_argument("MlParams: low_res_threshold must be >= 1");
}

LevelSchedule level_schedule(int full_width, int full_height, const MlParams& params) {
    if (full_width < 1 || full_height < 1)
        throw std::invalid_argument("level_schedule: size must be >= 1x1");
    params.validate();

    const unsigned m = unsigned(std::max(full_width, full_height));
    // ceil(log2(m)) in exact integer arithmetic; a 1x1 input still gets one
    // full-size level.
    int n_levels = m > 1 ? std::bit_width(m - 1) : 0;
    if (n_levels < 1) n_levels = 1;

    LevelSchedule schedule;
    schedule.levels.reserve(std::size_t(n_levels));
    for (int l = 1; l <= n_levels; ++l) {
        int w, h;
        if (l == n_levels) {
            w = full_width;
            h = full_height;
        } else {
            const double e = double(l) / double(n_levels);
            w = int(std::llround(std::pow(double(full_width), e)));
            h = int(std::llround(std::pow(double(full_height), e)));
        }
        const int iters = std::max(w, h) <= params.low_res_threshold ? params.iters_low : params.iters_high;
        schedule.levels.push_back({w, h, iters});
    }
    return schedule;
}

namespace {

PixelSolution solve_pixel_impl(double alpha_i, const std::array<double, 3>& intensity,
                               const std::vector<double>& neighbor_alphas,
                               const std::vector<std::array<double, 3>>& neighbor_fg,
                               const std::vector<std::array<double, 3>>& neighbor_bg,
                               const MlParams& params, bool clamp) {
    params.validate();
    const std::size_t n = neighbor_alphas.size();
    if (n < 1) throw std::invalid_argument("solve_pixel: at least one neighbor required");
    if (neighbor_fg.size() != n || neighbor_bg.size() != n)
        throw std::invalid_argument("solve_pixel: neighbor lists must share length");

    PixelSystem sys;
    sys.init(alpha_i, intensity.data());
    for (std::size_t j = 0; j < n; ++j) {
        const double dalpha = params.eps_r + params.omega * std::abs(alpha_i - neighbor_alphas[j]);
        sys.add_neighbor(dalpha, neighbor_fg[j].data(), neighbor_bg[j].data());
    }

    const double det = sys.determinant();
    if (!(det > 0.0) || !std::isfinite(1.0 / det))
        throw std::runtime_error("solve_pixel: singular 2x2 system (det = " + std::to_string(det) + ")");

    PixelSolution sol;
    sys.solve_raw(1.0 / det, sol.fg.data(), sol.bg.data());
    if (clamp) {
        for (int c = 0; c < 3; ++c) {
            sol.fg[c] = clamp01(sol.fg[c]);
            sol.bg[c] = clamp01(sol.bg[c]);
        }
    }
    return sol;
}

void sweep(const Image& image, const AlphaMatte& alpha, Image& fg, Image& bg, const MlParams& params) {
    const int w = image.width();
    const int h = image.height();
    const double* a = alpha.data().data();
    const double* img[3] = {image.plane(0), image.plane(1), image.plane(2)};
    double* fb[2][3] = {{fg.plane(0), fg.plane(1), fg.plane(2)},
                        {bg.plane(0), bg.plane(1), bg.plane(2)}};
    const double eps_r = params.eps_r;
    const double omega = params.omega;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = std::size_t(y) * w + x;
            const double a_i = a[i];
            const double u[2] = {a_i, 1.0 - a_i};
            double diag[2] = {u[0] * u[0], u[1] * u[1]};
            const double off = u[0] * u[1];
            double rhs[2][3];
            for (int k = 0; k < 2; ++k)
                for (int c = 0; c < 3; ++c) rhs[k][c] = img[c][i] * u[k];

            // 4-neighborhood, coordinates clamped to the image rectangle
            // (border pixels contribute self-regularization terms).
            const int nx[4] = {x > 0 ? x - 1 : 0, x < w - 1 ? x + 1 : w - 1, x, x};
            const int ny[4] = {y, y, y > 0 ? y - 1 : 0, y < h - 1 ? y + 1 : h - 1};
            for (int t = 0; t < 4; ++t) {
                const std::size_t j = std::size_t(ny[t]) * w + nx[t];
                const double dalpha = eps_r + omega * std::abs(a_i - a[j]);
                for (int k = 0; k < 2; ++k) {
                    diag[k] += dalpha;
                    for (int c = 0; c < 3; ++c) rhs[k][c] += dalpha * fb[k][c][j];
                }
            }

            const double inv_det = 1.0 / (diag[0] * diag[1] - off * off);
            for (int c = 0; c < 3; ++c)
                for (int k = 0; k < 2; ++k)
                    fb[k][c][i] = clamp01((diag[1 - k] * rhs[k][c] - off * rhs[1 - k][c]) * inv_det);
        }
    }
}

} // namespace

PixelSolution solve_pixel(double alpha_i, const std::array<double, 3>& intensity,
                          const std::vector<double>& neighbor_alphas,
                          const std::vector<std::array<double, 3>>& neighbor_fg,
                          const std::vector<std::array<double, 3>>& neighbor_bg,
                          const MlParams& params) {
    return solve_pixel_impl(alpha_i, intensity, neighbor_alphas, neighbor_fg, neighbor_bg, params, true);
}

PixelSolution solve_pixel_raw(double alpha_i, const std::array<double, 3>& intensity,
                              const std::vector<double>& neighbor_alphas,
                              const std::vector<std::array<double, 3>>& neighbor_fg,
                              const std::vector<std::array<double, 3>>& neighbor_bg,
                              const MlParams& params) {
    return solve_pixel_impl(alpha_i, intensity, neighbor_alphas, neighbor_fg, neighbor_bg, params, false);
}

std::pair<Image, Image> ml_foreground_background(const Image& image, const AlphaMatte& alpha,
                                                 const MlParams& params) {
    params.validate();
    if (image.channels() != 3)
        throw std::invalid_argument("ml_foreground_background: image must have 3 channels, got " +
                                    std::to_string(image.channels()));
    if (image.width() != alpha.width() || image.height() != alpha.height())
        throw std::invalid_argument("ml_foreground_background: alpha size " +
                                    std::to_string(alpha.width()) + "x" + std::to_string(alpha.height()) +
                                    " does not match image size " +
                                    std::to_string(image.width()) + "x" + std::to_string(image.height()));

    const LevelSchedule schedule = level_schedule(image.width(), image.height(), params);

    Image fg(1, 1, 3);
    Image bg(1, 1, 3);
    for (const LevelSpec& level : schedule.levels) {
        const Image level_image = resize(image, level.width, level.height);
        const AlphaMatte level_alpha = resize(alpha, level.width, level.height);
        fg = resize(fg, level.width, level.height);
        bg = resize(bg, level.width, level.height);
        for (int it = 0; it < level.iterations; ++it)
            sweep(level_image, level_alpha, fg, bg, params);
    }
    return {std::move(fg), std::move(bg)};
}

} // namespace fgmatte
