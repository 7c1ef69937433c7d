#pragma once

// Test-side reference implementations, independent of the library's solve
// paths: a dense Gaussian-elimination solver, a dense Cholesky PD check,
// the global cost function evaluated straight from its definition, and
// synthetic composite builders.

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fgmatte/closedform.hpp"
#include "fgmatte/image.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (a[pivot][col] == 0.0) throw std::runtime_error("dense_solve: singular matrix");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

// Positive definiteness certificate: dense Cholesky with strictly positive
// pivots.
inline bool dense_is_positive_definite(Matrix a, double min_pivot = 0.0) {
    const std::size_t n = a.size();
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
        if (!(d > min_pivot)) return false;
        const double l = std::sqrt(d);
        a[j][j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i][j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i][k] * a[j][k];
            a[i][j] = v / l;
        }
    }
    return true;
}

inline Matrix densify(const fgmatte::SparseSymmetricSystem& sys) {
    const std::size_t dim = std::size_t(sys.dim());
    Matrix a(dim, std::vector<double>(dim, 0.0));
    for (std::size_t r = 0; r < dim; ++r)
        for (auto k = sys.row_ptr()[r]; k < sys.row_ptr()[r + 1]; ++k)
            a[r][std::size_t(sys.cols()[k])] = sys.values()[std::size_t(k)];
    return a;
}

// The global cost evaluated from its definition: data term plus
// forward-difference gradient terms weighted by |alpha gradient| + eps_cf,
// both omitted at the right/bottom border.
inline double global_cost(const fgmatte::Image& image, const fgmatte::AlphaMatte& alpha,
                          double eps_cf, const std::vector<double>& x_f,
                          const std::vector<double>& x_b, int channel) {
    const int w = image.width();
    const int h = image.height();
    const double* img = image.plane(channel);
    double cost = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = std::size_t(y) * w + x;
            const double a = alpha.at(x, y);
            const double data = a * x_f[i] + (1.0 - a) * x_b[i] - img[i];
            cost += data * data;
            if (x + 1 < w) {
                const std::size_t j = i + 1;
                const double wgt = std::abs(alpha.at(x + 1, y) - a) + eps_cf;
                cost += wgt * ((x_f[j] - x_f[i]) * (x_f[j] - x_f[i]) + (x_b[j] - x_b[i]) * (x_b[j] - x_b[i]));
            }
            if (y + 1 < h) {
                const std::size_t j = i + std::size_t(w);
                const double wgt = std::abs(alpha.at(x, y + 1) - a) + eps_cf;
                cost += wgt * ((x_f[j] - x_f[i]) * (x_f[j] - x_f[i]) + (x_b[j] - x_b[i]) * (x_b[j] - x_b[i]));
            }
        }
    return cost;
}

inline double global_cost_images(const fgmatte::Image& image, const fgmatte::AlphaMatte& alpha,
                                 double eps_cf, const fgmatte::Image& fg, const fgmatte::Image& bg) {
    double total = 0.0;
    const std::size_t n = image.pixel_count();
    for (int c = 0; c < 3; ++c) {
        std::vector<double> xf(fg.plane(c), fg.plane(c) + n);
        std::vector<double> xb(bg.plane(c), bg.plane(c) + n);
        total += global_cost(image, alpha, eps_cf, xf, xb, c);
    }
    return total;
}

// Smooth random field: a coarse random grid bilinearly upsampled, values in
// [lo, hi].
inline fgmatte::Image smooth_field(int width, int height, int channels, std::mt19937_64& rng,
                                   double lo = 0.0, double hi = 1.0, int coarse = 4) {
    std::uniform_real_distribution<double> dist(lo, hi);
    fgmatte::Image grid(coarse, coarse, channels);
    for (double& v : grid.data()) v = dist(rng);
    return fgmatte::resize(grid, width, height);
}

inline fgmatte::AlphaMatte ramp_alpha(int width, int height) {
    fgmatte::AlphaMatte alpha(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            alpha.at(x, y) = width > 1 ? double(x) / double(width - 1) : 0.5;
    return alpha;
}

// Dyadic values (multiples of 2^-10) make 1 - alpha exact and bilinear
// resampling of power-of-two sizes exact, which the bitwise symmetry tests
// rely on.
inline fgmatte::AlphaMatte dyadic_alpha(int width, int height, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dist(0, 1024);
    fgmatte::AlphaMatte alpha(width, height);
    for (double& v : alpha.data()) v = double(dist(rng)) / 1024.0;
    return alpha;
}

struct Composite {
    fgmatte::Image fg_true;
    fgmatte::Image bg_true;
    fgmatte::AlphaMatte alpha;
    fgmatte::Image image;
};

inline Composite smooth_composite(int width, int height, std::mt19937_64& rng, bool smooth_alpha = true) {
    Composite c;
    c.fg_true = smooth_field(width, height, 3, rng);
    c.bg_true = smooth_field(width, height, 3, rng);
    if (smooth_alpha) {
        fgmatte::Image a = smooth_field(width, height, 1, rng);
        c.alpha = fgmatte::AlphaMatte(width, height);
        c.alpha.data() = a.data();
    } else {
        c.alpha = ramp_alpha(width, height);
    }
    c.image = fgmatte::compose(c.fg_true, c.bg_true, c.alpha);
    return c;
}

} // namespace oracle
