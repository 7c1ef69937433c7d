#pragma once

#include <array>
#include <vector>

#include "fgmatte/image.hpp"

namespace fgmatte {

struct GammaParams {
    double gamma = 2.0;

    void validate() const;
};

/// Inverse gamma correction: s / 12.92 for s <= 0.04045, else
/// ((s + 0.055) / 1.055)^gamma. Input is clamped to [0, 1] first.
double srgb_to_linear(double s, const GammaParams& params = {});

/// Gamma correction: 12.92 l for l <= 0.0031308, else
/// 1.055 l^(1/gamma) - 0.055. Note that with the default gamma = 2 the two
/// branches do not meet at the knee; the formula is applied verbatim.
double linear_to_srgb(double l, const GammaParams& params = {});

Image srgb_to_linear(const Image& srgb, const GammaParams& params = {});
Image linear_to_srgb(const Image& linear, const GammaParams& params = {});

/// Least-squares 3x3 color transform M minimizing sum |M v_i - w_i|^2,
/// i.e. M = (W'V)(V'V)^-1 over stacked color row vectors.
struct WhitePointFit {
    std::array<std::array<double, 3>, 3> m{};
    double residual = 0.0;
};

WhitePointFit fit_white_point(const std::vector<std::array<double, 3>>& source_colors,
                              const std::vector<std::array<double, 3>>& target_colors);
/// Convenience overload treating every pixel of the image pair as one row.
WhitePointFit fit_white_point(const Image& source, const Image& target);

/// Per-pixel matrix-vector product, clamped to [0, 1].
Image apply_white_point(const Image& image, const WhitePointFit& fit);

struct GroundTruthPair {
    Image fg_gt;
    Image img_input;
    WhitePointFit fit;
};

/// Dataset preparation: invert gamma on the white-point-corrected sRGB
/// image, fit M from the linear image to it, apply M to the linear
/// foreground and image (unclamped), then gamma-correct and clamp.
GroundTruthPair prepare_ground_truth(const Image& fg_linear, const Image& img_linear,
                                     const Image& img_srgb_wp, const GammaParams& params = {});

} // namespace fgmatte
