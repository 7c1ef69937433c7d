#include "fgmatte/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fgmatte {

int GradParams::effective_radius() const {
    return kernel_radius > 0 ? kernel_radius : int(std::ceil(4.0 * sigma));
}

void GradParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("GradParams: sigma must be > 0");
    if (effective_radius() < 1) throw std::invalid_argument("GradParams: kernel radius must be >= 1");
}

namespace {

void require_match(const char* op, const Image& est, const Image& gt, const AlphaMatte& alpha) {
    if (!est.same_size(gt) || est.channels() != gt.channels())
        throw std::invalid_argument(std::string(op) + ": est " + std::to_string(est.width()) + "x" +
                                    std::to_string(est.height()) + "x" + std::to_string(est.channels()) +
                                    " does not match gt " + std::to_string(gt.width()) + "x" +
                                    std::to_string(gt.height()) + "x" + std::to_string(gt.channels()));
    if (alpha.width() != est.width() || alpha.height() != est.height())
        throw std::invalid_argument(std::string(op) + ": alpha size " + std::to_string(alpha.width()) + "x" +
                                    std::to_string(alpha.height()) + " does not match images " +
                                    std::to_string(est.width()) + "x" + std::to_string(est.height()));
}

inline bool translucent(double a) { return a > 0.0 && a < 1.0; }

// out(x) = sum_k kern[r+k] * img(clamp(x+k)), along one axis.
void convolve_axis(const double* src, int w, int h, bool along_x,
                   const std::vector<double>& kern, double* dst) {
    const int r = int(kern.size() / 2);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            if (along_x) {
                for (int k = -r; k <= r; ++k) {
                    int xx = x + k;
                    xx = xx < 0 ? 0 : (xx > w - 1 ? w - 1 : xx);
                    acc += kern[std::size_t(k + r)] * src[std::size_t(y) * w + xx];
                }
            } else {
                for (int k = -r; k <= r; ++k) {
                    int yy = y + k;
                    yy = yy < 0 ? 0 : (yy > h - 1 ? h - 1 : yy);
                    acc += kern[std::size_t(k + r)] * src[std::size_t(yy) * w + x];
                }
            }
            dst[std::size_t(y) * w + x] = acc;
        }
    }
}

} // namespace

std::vector<double> gaussian_derivative_kernel(double sigma, int radius) {
    if (!(sigma > 0.0) || radius < 1)
        throw std::invalid_argument("gaussian_derivative_kernel: need sigma > 0 and radius >= 1");
    std::vector<double> kern(std::size_t(2 * radius + 1));
    double ramp_response = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double g = std::exp(-(double(k) * k) / (2.0 * sigma * sigma));
        kern[std::size_t(k + radius)] = double(k) * g;
        ramp_response += double(k) * k * g;
    }
    for (double& v : kern) v /= ramp_response;
    return kern;
}

double sad(const Image& est, const Image& gt, const AlphaMatte& alpha_gt) {
    require_match("sad", est, gt, alpha_gt);
    const double* a = alpha_gt.data().data();
    double total = 0.0;
    for (std::size_t i = 0; i < est.pixel_count(); ++i) {
        if (!translucent(a[i])) continue;
        double d = 0.0;
        for (int c = 0; c < est.channels(); ++c) d += std::abs(est.plane(c)[i] - gt.plane(c)[i]);
        total += a[i] * d;
    }
    return total;
}

double mse(const Image& est, const Image& gt, const AlphaMatte& alpha_gt) {
    require_match("mse", est, gt, alpha_gt);
    const double* a = alpha_gt.data().data();
    double total = 0.0;
    for (std::size_t i = 0; i < est.pixel_count(); ++i) {
        if (!translucent(a[i])) continue;
        double d = 0.0;
        for (int c = 0; c < est.channels(); ++c) {
            const double e = est.plane(c)[i] - gt.plane(c)[i];
            d += e * e;
        }
        total += a[i] * d;
    }
    return total;
}

double grad_error(const Image& est, const Image& gt, const AlphaMatte& alpha_gt,
                  const GradParams& params) {
    require_match("grad_error", est, gt, alpha_gt);
    params.validate();

    const int w = est.width();
    const int h = est.height();
    const std::vector<double> kern = gaussian_derivative_kernel(params.sigma, params.effective_radius());
    const double* a = alpha_gt.data().data();

    std::vector<double> dex(est.pixel_count()), dey(est.pixel_count());
    std::vector<double> dgx(est.pixel_count()), dgy(est.pixel_count());

    double total = 0.0;
    for (int c = 0; c < est.channels(); ++c) {
        convolve_axis(est.plane(c), w, h, true, kern, dex.data());
        convolve_axis(est.plane(c), w, h, false, kern, dey.data());
        convolve_axis(gt.plane(c), w, h, true, kern, dgx.data());
        convolve_axis(gt.plane(c), w, h, false, kern, dgy.data());
        for (std::size_t i = 0; i < est.pixel_count(); ++i) {
            if (!translucent(a[i])) continue;
            const double gx = dex[i] - dgx[i];
            const double gy = dey[i] - dgy[i];
            total += a[i] * (gx * gx + gy * gy);
        }
    }
    return total;
}

MetricReport evaluate_metrics(const Image& est, const Image& gt, const AlphaMatte& alpha_gt,
                              const GradParams& params) {
    MetricReport report;
    report.sad = sad(est, gt, alpha_gt);
    report.mse = mse(est, gt, alpha_gt);
    report.grad = grad_error(est, gt, alpha_gt, params);
    const double* a = alpha_gt.data().data();
    for (std::size_t i = 0; i < alpha_gt.pixel_count(); ++i)
        if (translucent(a[i])) ++report.translucent_pixel_count;
    return report;
}

} // namespace fgmatte
