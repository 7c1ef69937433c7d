#pragma once

#include <cstdint>
#include <vector>

#include "fgmatte/image.hpp"

namespace fgmatte {

/// Gaussian-derivative filter controls for the gradient error.
struct GradParams {
    double sigma = 1.4;
    int kernel_radius = 0; ///< 0 means ceil(4 * sigma)

    int effective_radius() const;
    void validate() const;
};

struct MetricReport {
    double sad = 0.0;
    double mse = 0.0;
    double grad = 0.0;
    std::int64_t translucent_pixel_count = 0;
};

/// Alpha-weighted sum of absolute differences over the translucent region
/// (pixels with 0 < alpha < 1, both strict).
double sad(const Image& est, const Image& gt, const AlphaMatte& alpha_gt);

/// Alpha-weighted sum of squared differences over the translucent region.
/// Despite the customary name this is a weighted sum, not a mean.
double mse(const Image& est, const Image& gt, const AlphaMatte& alpha_gt);

/// Alpha-weighted sum of squared gradient differences over the translucent
/// region; gradients are one edge-clamped convolution per axis with a
/// sampled first-derivative-of-Gaussian kernel.
double grad_error(const Image& est, const Image& gt, const AlphaMatte& alpha_gt,
                  const GradParams& params = {});

MetricReport evaluate_metrics(const Image& est, const Image& gt, const AlphaMatte& alpha_gt,
                              const GradParams& params = {});

/// Sampled first-derivative-of-Gaussian taps for offsets -radius..radius,
/// scaled so the response to a unit-slope ramp is exactly 1. The taps sum
/// to zero up to rounding.
std::vector<double> gaussian_derivative_kernel(double sigma, int radius);

} // namespace fgmatte
