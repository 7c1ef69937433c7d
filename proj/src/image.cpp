#include "fgmatte/image.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fgmatte {

namespace {

std::string size_str(int w, int h) {
    return std::to_string(w) + "x" + std::to_string(h);
}

void require_dims(const char* op, const char* operand, int w, int h, int rw, int rh) {
    if (w != rw || h != rh) {
        throw std::invalid_argument(std::string(op) + ": " + operand + " size " + size_str(w, h) +
                                    " does not match size " + size_str(rw, rh));
    }
}

} // namespace

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels),
      data_(std::size_t(width) * height * channels, fill) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("Image: dimensions must be >= 1, got " + size_str(width, height));
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("Image: channels must be 1 or 3, got " + std::to_string(channels));
}

AlphaMatte::AlphaMatte(int width, int height, double fill)
    : width_(width), height_(height), data_(std::size_t(width) * height, fill) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("AlphaMatte: dimensions must be >= 1, got " + size_str(width, height));
}

Image compose(const Image& fg, const Image& bg, const AlphaMatte& alpha) {
    require_dims("compose", "bg", bg.width(), bg.height(), fg.width(), fg.height());
    require_dims("compose", "alpha", alpha.width(), alpha.height(), fg.width(), fg.height());
    if (fg.channels() != bg.channels())
        throw std::invalid_argument("compose: bg has " + std::to_string(bg.channels()) +
                                    " channels, fg has " + std::to_string(fg.channels()));

    Image out(fg.width(), fg.height(), fg.channels());
    const std::size_t n = fg.pixel_count();
    const double* a = alpha.data().data();
    for (int c = 0; c < fg.channels(); ++c) {
        const double* f = fg.plane(c);
        const double* b = bg.plane(c);
        double* o = out.plane(c);
        for (std::size_t i = 0; i < n; ++i)
            o[i] = clamp01(a[i] * f[i] + (1.0 - a[i]) * b[i]);
    }
    return out;
}

Image compose_naive(const Image& image, const Image& bg, const AlphaMatte& alpha) {
    return compose(image, bg, alpha);
}

namespace {

struct Tap {
    int i0;
    int i1;
    double t;
};

std::vector<Tap> make_taps(int src_size, int dst_size) {
    std::vector<Tap> taps(dst_size);
    const double scale = double(src_size) / double(dst_size);
    for (int d = 0; d < dst_size; ++d) {
        double f = (d + 0.5) * scale - 0.5;
        if (f < 0.0) f = 0.0;
        const double max_f = double(src_size - 1);
        if (f > max_f) f = max_f;
        const int i0 = int(f);
        taps[d] = {i0, std::min(i0 + 1, src_size - 1), f - double(i0)};
    }
    return taps;
}

// Two-stage lerp keeps constants exact and values in range without a
// correction pass.
void resize_plane(const double* src, int sw, int sh, double* dst, int dw, int dh,
                  const std::vector<Tap>& xs, const std::vector<Tap>& ys) {
    for (int y = 0; y < dh; ++y) {
        const Tap& ty = ys[y];
        const double* row0 = src + std::size_t(ty.i0) * sw;
        const double* row1 = src + std::size_t(ty.i1) * sw;
        double* out = dst + std::size_t(y) * dw;
        for (int x = 0; x < dw; ++x) {
            const Tap& tx = xs[x];
            const double a = row0[tx.i0];
            const double b = row0[tx.i1];
            const double c = row1[tx.i0];
            const double d = row1[tx.i1];
            const double top = a + tx.t * (b - a);
            const double bot = c + tx.t * (d - c);
            out[x] = clamp01(top + ty.t * (bot - top));
        }
    }
}

void check_target(int w, int h) {
    if (w < 1 || h < 1)
        throw std::invalid_argument("resize: target size must be >= 1x1, got " + size_str(w, h));
}

} // namespace

Image resize(const Image& src, int new_width, int new_height) {
    check_target(new_width, new_height);
    if (new_width == src.width() && new_height == src.height()) return src;
    Image out(new_width, new_height, src.channels());
    const auto xs = make_taps(src.width(), new_width);
    const auto ys = make_taps(src.height(), new_height);
    for (int c = 0; c < src.channels(); ++c)
        resize_plane(src.plane(c), src.width(), src.height(), out.plane(c), new_width, new_height, xs, ys);
    return out;
}

AlphaMatte resize(const AlphaMatte& src, int new_width, int new_height) {
    check_target(new_width, new_height);
    if (new_width == src.width() && new_height == src.height()) return src;
    AlphaMatte out(new_width, new_height);
    const auto xs = make_taps(src.width(), new_width);
    const auto ys = make_taps(src.height(), new_height);
    resize_plane(src.data().data(), src.width(), src.height(), out.data().data(), new_width, new_height, xs, ys);
    return out;
}

} // namespace fgmatte
