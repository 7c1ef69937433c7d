#pragma once

#include <array>
#include <utility>
#include <vector>

#include "fgmatte/image.hpp"

namespace fgmatte {

/// Controls for multi-level foreground/background color estimation.
struct MlParams {
    double omega = 0.1;        ///< weight of the alpha-gradient term
    double eps_r = 5e-3;       ///< regularization factor (must be > 0)
    int low_res_threshold = 32;///< levels with max(w,h) <= this run iters_low sweeps
    int iters_low = 10;
    int iters_high = 2;

    void validate() const;
};

struct LevelSpec {
    int width = 0;
    int height = 0;
    int iterations = 0;
};

struct LevelSchedule {
    std::vector<LevelSpec> levels;
};

/// Number of levels is ceil(log2(max(w, h))) (at least one); level l has size
/// (round(w^(l/n)), round(h^(l/n))), so each dimension at most doubles
/// between consecutive levels. The last level is exactly the full size.
LevelSchedule level_schedule(int full_width, int full_height, const MlParams& params = {});

/// The per-pixel 2x2 normal equations: A = U U^T + (sum_j dalpha_j) I with
/// U = [alpha, 1 - alpha], right-hand side column c =
/// I^c U + [sum_j dalpha_j F_j^c ; sum_j dalpha_j B_j^c], where
/// dalpha_j = eps_r + omega |alpha_i - alpha_j|. A is shared by all channels.
///
/// All arithmetic is written index-symmetrically in (F, B) so that
/// complementing alpha mirrors the computation onto the swapped outputs
/// exactly.
struct PixelSystem {
    double diag[2];
    double off;
    double rhs[2][3];

    void init(double alpha_i, const double intensity[3]) {
        const double u[2] = {alpha_i, 1.0 - alpha_i};
        for (int k = 0; k < 2; ++k) diag[k] = u[k] * u[k];
        off = u[0] * u[1];
        for (int k = 0; k < 2; ++k)
            for (int c = 0; c < 3; ++c) rhs[k][c] = intensity[c] * u[k];
    }

    void add_neighbor(double dalpha, const double fg_j[3], const double bg_j[3]) {
        const double* nbr[2] = {fg_j, bg_j};
        for (int k = 0; k < 2; ++k) {
            diag[k] += dalpha;
            for (int c = 0; c < 3; ++c) rhs[k][c] += dalpha * nbr[k][c];
        }
    }

    double determinant() const { return diag[0] * diag[1] - off * off; }

    /// Unclamped solution of A g = b per channel. Caller guarantees det > 0.
    void solve_raw(double inv_det, double fg_out[3], double bg_out[3]) const {
        double* out[2] = {fg_out, bg_out};
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 2; ++k)
                out[k][c] = (diag[1 - k] * rhs[k][c] - off * rhs[1 - k][c]) * inv_det;
    }
};

struct PixelSolution {
    std::array<double, 3> fg;
    std::array<double, 3> bg;
};

/// Solve the local cost for one pixel given its neighbors' current colors.
/// Outputs are clamped to [0, 1]; solve_pixel_raw returns the unclamped
/// solution of the same system.
PixelSolution solve_pixel(double alpha_i, const std::array<double, 3>& intensity,
                          const std::vector<double>& neighbor_alphas,
                          const std::vector<std::array<double, 3>>& neighbor_fg,
                          const std::vector<std::array<double, 3>>& neighbor_bg,
                          const MlParams& params = {});
PixelSolution solve_pixel_raw(double alpha_i, const std::array<double, 3>& intensity,
                              const std::vector<double>& neighbor_alphas,
                              const std::vector<std::array<double, 3>>& neighbor_fg,
                              const std::vector<std::array<double, 3>>& neighbor_bg,
                              const MlParams& params = {});

/// Multi-level color estimation. F and B start as 1x1 zeros; at each level
/// the inputs are resampled from the full-resolution originals, F and B from
/// the previous level, then the level runs its sweep count of in-place
/// scanline passes (Gauss-Seidel: a pixel sees already-updated neighbors).
/// Neighbors are the 4-neighborhood with coordinates clamped to the image,
/// so border pixels pick up self-neighbors.
std::pair<Image, Image> ml_foreground_background(const Image& image, const AlphaMatte& alpha,
                                                 const MlParams& params = {});

} // namespace fgmatte
