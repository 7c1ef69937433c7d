#include "fgmatte/colorspace.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fgmatte {

void GammaParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("GammaParams: gamma must be > 0");
}

double srgb_to_linear(double s, const GammaParams& params) {
    params.validate();
    s = clamp01(s);
    if (s <= 0.04045) return s / 12.92;
    return std::pow((s + 0.055) / 1.055, params.gamma);
}

double linear_to_srgb(double l, const GammaParams& params) {
    params.validate();
    if (l <= 0.0031308) return 12.92 * l;
    return 1.055 * std::pow(l, 1.0 / params.gamma) - 0.055;
}

Image srgb_to_linear(const Image& srgb, const GammaParams& params) {
    params.validate();
    Image out(srgb.width(), srgb.height(), srgb.channels());
    for (std::size_t i = 0; i < srgb.data().size(); ++i)
        out.data()[i] = srgb_to_linear(srgb.data()[i], params);
    return out;
}

Image linear_to_srgb(const Image& linear, const GammaParams& params) {
    params.validate();
    Image out(linear.width(), linear.height(), linear.channels());
    for (std::size_t i = 0; i < linear.data().size(); ++i)
        out.data()[i] = clamp01(linear_to_srgb(clamp01(linear.data()[i]), params));
    return out;
}

namespace {

// Solve the 3x3 system S x = b by Gaussian elimination with partial
// pivoting; throws on rank deficiency.
std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> aug) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        if (std::abs(aug[pivot][col]) < 1e-12)
            throw std::invalid_argument("fit_white_point: source colors are rank-deficient (V'V singular)");
        std::swap(aug[col], aug[pivot]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = aug[r][col] / aug[col][col];
            for (int k = col; k < 4; ++k) aug[r][k] -= f * aug[col][k];
        }
    }
    return {aug[0][3] / aug[0][0], aug[1][3] / aug[1][1], aug[2][3] / aug[2][2]};
}

WhitePointFit fit_from_rows(const double* v0, const double* v1, const double* v2,
                            const double* w0, const double* w1, const double* w2,
                            std::size_t n) {
    if (n < 3) throw std::invalid_argument("fit_white_point: need at least 3 color samples");

    // Accumulate V'V and V'W in a fixed sequential order (deterministic).
    double vtv[3][3] = {};
    double vtw[3][3] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double v[3] = {v0[i], v1[i], v2[i]};
        const double w[3] = {w0[i], w1[i], w2[i]};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                vtv[r][c] += v[r] * v[c];
                vtw[r][c] += v[r] * w[c];
            }
    }

    WhitePointFit fit;
    // M (V'V) = W'V  <=>  (V'V) M^T = V'W; solve one column of M^T per
    // output channel.
    for (int col = 0; col < 3; ++col) {
        std::array<std::array<double, 4>, 3> aug{};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) aug[r][c] = vtv[r][c];
            aug[r][3] = vtw[r][col];
        }
        const std::array<double, 3> m_row = solve3(aug);
        for (int c = 0; c < 3; ++c) fit.m[col][c] = m_row[c];
    }

    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v[3] = {v0[i], v1[i], v2[i]};
        const double w[3] = {w0[i], w1[i], w2[i]};
        for (int r = 0; r < 3; ++r) {
            const double e = fit.m[r][0] * v[0] + fit.m[r][1] * v[1] + fit.m[r][2] * v[2] - w[r];
            residual += e * e;
        }
    }
    fit.residual = residual;
    return fit;
}

} // namespace

WhitePointFit fit_white_point(const std::vector<std::array<double, 3>>& source_colors,
                              const std::vector<std::array<double, 3>>& target_colors) {
    if (source_colors.size() != target_colors.size())
        throw std::invalid_argument("fit_white_point: source and target must have the same number of rows");
    const std::size_t n = source_colors.size();
    std::vector<double> v(3 * n), w(3 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
            v[std::size_t(c) * n + i] = source_colors[i][std::size_t(c)];
            w[std::size_t(c) * n + i] = target_colors[i][std::size_t(c)];
        }
    return fit_from_rows(v.data(), v.data() + n, v.data() + 2 * n,
                         w.data(), w.data() + n, w.data() + 2 * n, n);
}

WhitePointFit fit_white_point(const Image& source, const Image& target) {
    if (source.channels() != 3 || target.channels() != 3)
        throw std::invalid_argument("fit_white_point: images must have 3 channels");
    if (!source.same_size(target))
        throw std::invalid_argument("fit_white_point: source size " + std::to_string(source.width()) + "x" +
                                    std::to_string(source.height()) + " does not match target size " +
                                    std::to_string(target.width()) + "x" + std::to_string(target.height()));
    return fit_from_rows(source.plane(0), source.plane(1), source.plane(2),
                         target.plane(0), target.plane(1), target.plane(2), source.pixel_count());
}

namespace {

Image apply_matrix(const Image& image, const WhitePointFit& fit, bool clamp) {
    if (image.channels() != 3)
        throw std::invalid_argument("apply_white_point: image must have 3 channels, got " +
                                    std::to_string(image.channels()));
    Image out(image.width(), image.height(), 3);
    const double* in[3] = {image.plane(0), image.plane(1), image.plane(2)};
    double* o[3] = {out.plane(0), out.plane(1), out.plane(2)};
    for (std::size_t i = 0; i < image.pixel_count(); ++i)
        for (int r = 0; r < 3; ++r) {
            const double v = fit.m[r][0] * in[0][i] + fit.m[r][1] * in[1][i] + fit.m[r][2] * in[2][i];
            o[r][i] = clamp ? clamp01(v) : v;
        }
    return out;
}

} // namespace

Image apply_white_point(const Image& image, const WhitePointFit& fit) {
    return apply_matrix(image, fit, true);
}

GroundTruthPair prepare_ground_truth(const Image& fg_linear, const Image& img_linear,
                                     const Image& img_srgb_wp, const GammaParams& params) {
    params.validate();
    if (fg_linear.channels() != 3 || img_linear.channels() != 3 || img_srgb_wp.channels() != 3)
        throw std::invalid_argument("prepare_ground_truth: all images must have 3 channels");
    if (!fg_linear.same_size(img_linear) || !fg_linear.same_size(img_srgb_wp))
        throw std::invalid_argument("prepare_ground_truth: images must share dimensions");

    const Image img_wp_linear = srgb_to_linear(img_srgb_wp, params);
    GroundTruthPair result;
    result.fit = fit_white_point(img_linear, img_wp_linear);

    // Clamp only at the pipeline exits; the white-pointed linear values may
    // leave [0,1] transiently.
    const Image fg_wp = apply_matrix(fg_linear, result.fit, false);
    const Image img_wp = apply_matrix(img_linear, result.fit, false);

    const auto to_srgb_clamped = [&](const Image& linear) {
        Image out(linear.width(), linear.height(), 3);
        for (std::size_t i = 0; i < linear.data().size(); ++i)
            out.data()[i] = clamp01(linear_to_srgb(linear.data()[i], params));
        return out;
    };
    result.fg_gt = to_srgb_clamped(fg_wp);
    result.img_input = to_srgb_clamped(img_wp);
    return result;
}

} // namespace fgmatte
