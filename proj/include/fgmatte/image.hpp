#pragma once

#include <cstddef>
#include <vector>

namespace fgmatte {

/// Planar float raster with values in [0, 1]. Channel planes are stored
/// back to back, each plane row-major: plane(c)[y * width + x].
/// The planar layout keeps per-pixel work channel-major, which is the hot
/// access pattern of the solvers (one 2x2 system shared by all channels).
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return std::size_t(width_) * height_; }

    double* plane(int c) { return data_.data() + std::size_t(c) * pixel_count(); }
    const double* plane(int c) const { return data_.data() + std::size_t(c) * pixel_count(); }

    double& at(int x, int y, int c) { return data_[std::size_t(c) * pixel_count() + std::size_t(y) * width_ + x]; }
    double at(int x, int y, int c) const { return data_[std::size_t(c) * pixel_count() + std::size_t(y) * width_ + x]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_size(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Single-channel opacity raster, values in [0, 1].
class AlphaMatte {
public:
    AlphaMatte() = default;
    AlphaMatte(int width, int height, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return std::size_t(width_) * height_; }

    double& at(int x, int y) { return data_[std::size_t(y) * width_ + x]; }
    double at(int x, int y) const { return data_[std::size_t(y) * width_ + x]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

/// I = alpha * F + (1 - alpha) * B, clamped to [0, 1].
Image compose(const Image& fg, const Image& bg, const AlphaMatte& alpha);

/// Compositing with the input image standing in for the foreground:
/// I_new = alpha * I + (1 - alpha) * B. Background colors baked into I
/// bleed through wherever alpha is not binary.
Image compose_naive(const Image& image, const Image& bg, const AlphaMatte& alpha);

/// Bilinear resize with edge-clamped sampling and pixel centers aligned
/// at (x + 0.5) / w. Resizing to the same size is the identity bit-for-bit;
/// constant rasters stay constant bit-for-bit.
Image resize(const Image& src, int new_width, int new_height);
AlphaMatte resize(const AlphaMatte& src, int new_width, int new_height);

} // namespace fgmatte
