#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "fgmatte/image.hpp"

namespace fgmatte {

class PngError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decoded PNG: color planes (1 or 3 channels) plus the alpha channel when
/// the file has one. Integer samples with maximum M map to v / M.
struct PngData {
    Image color;
    std::optional<AlphaMatte> alpha;
    int bit_depth = 8;
};

PngData load_png(const std::string& path);

enum class AlphaSource { GrayPng, AlphaChannel };

/// Load an alpha matte either from a grayscale PNG or from the alpha
/// channel of an RGBA/gray+alpha PNG.
AlphaMatte load_alpha_png(const std::string& path, AlphaSource source);

/// Write an image as 8- or 16-bit grayscale/RGB PNG; values are quantized
/// as round(v * M) with clamping.
void save_png(const std::string& path, const Image& image, int bit_depth = 16);
void save_png(const std::string& path, const AlphaMatte& alpha, int bit_depth = 16);

} // namespace fgmatte
