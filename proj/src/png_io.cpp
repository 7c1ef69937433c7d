#include "fgmatte/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace fgmatte {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

PngData load_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw PngError("cannot open " + path + " for reading");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw PngError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw PngError("png_create_info_struct failed");
    }
    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw PngError("failed to decode " + path);
    }

    png_init_io(png, file.get());
    png_read_info(png, info);

    const int width = int(png_get_image_width(png, info));
    const int height = int(png_get_image_height(png, info));
    int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
#if defined(PNG_READ_SWAP_SUPPORTED)
    if (bit_depth == 16) png_set_swap(png); // file is big-endian; host is little-endian
#endif
    png_read_update_info(png, info);

    bit_depth = png_get_bit_depth(png, info);
    const int channels = int(png_get_channels(png, info));
    const std::size_t stride = png_get_rowbytes(png, info);

    pixels.resize(stride * std::size_t(height));
    row_ptrs.resize(std::size_t(height));
    for (int y = 0; y < height; ++y) row_ptrs[std::size_t(y)] = pixels.data() + std::size_t(y) * stride;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const bool has_alpha = channels == 2 || channels == 4;
    const int color_channels = channels >= 3 ? 3 : 1;
    const double max_value = bit_depth == 16 ? 65535.0 : 255.0;

    PngData out;
    out.bit_depth = bit_depth;
    out.color = Image(width, height, color_channels);
    if (has_alpha) out.alpha = AlphaMatte(width, height);

    const auto sample = [&](int x, int y, int ch) -> double {
        const std::size_t idx = (std::size_t(y) * width + x) * std::size_t(channels) + std::size_t(ch);
        if (bit_depth == 16) {
            const png_uint_16* p16 = reinterpret_cast<const png_uint_16*>(pixels.data());
            return double(p16[idx]) / max_value;
        }
        return double(pixels[idx]) / max_value;
    };

    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < color_channels; ++c) out.color.at(x, y, c) = sample(x, y, c);
            if (has_alpha) out.alpha->at(x, y) = sample(x, y, channels - 1);
        }
    return out;
}

AlphaMatte load_alpha_png(const std::string& path, AlphaSource source) {
    PngData data = load_png(path);
    if (source == AlphaSource::AlphaChannel) {
        if (!data.alpha)
            throw PngError(path + " has no alpha channel (alpha-channel source requested)");
        return std::move(*data.alpha);
    }
    if (data.color.channels() != 1)
        throw PngError(path + " is not grayscale (gray-png source requested); "
                              "use the alpha-channel source for RGBA files");
    AlphaMatte alpha(data.color.width(), data.color.height());
    alpha.data() = data.color.data();
    return alpha;
}

namespace {

void write_png_planes(const std::string& path, const double* const* planes, int channels,
                      int width, int height, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw PngError("save_png: bit depth must be 8 or 16, got " + std::to_string(bit_depth));

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw PngError("cannot open " + path + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw PngError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw PngError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw PngError("failed to encode " + path);
    }

    png_init_io(png, file.get());
    const int color_type = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
#if defined(PNG_WRITE_SWAP_SUPPORTED)
    if (bit_depth == 16) png_set_swap(png);
#endif

    const double max_value = bit_depth == 16 ? 65535.0 : 255.0;
    const std::size_t stride = std::size_t(width) * std::size_t(channels) * (bit_depth / 8);
    std::vector<png_byte> row(stride);

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < channels; ++c) {
                const double v = clamp01(planes[c][std::size_t(y) * width + x]);
                const long q = std::lround(v * max_value);
                if (bit_depth == 16) {
                    reinterpret_cast<png_uint_16*>(row.data())[std::size_t(x) * channels + c] = png_uint_16(q);
                } else {
                    row[std::size_t(x) * channels + c] = png_byte(q);
                }
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

void save_png(const std::string& path, const Image& image, int bit_depth) {
    const double* planes[3] = {image.plane(0), nullptr, nullptr};
    for (int c = 1; c < image.channels(); ++c) planes[c] = image.plane(c);
    write_png_planes(path, planes, image.channels(), image.width(), image.height(), bit_depth);
}

void save_png(const std::string& path, const AlphaMatte& alpha, int bit_depth) {
    const double* planes[1] = {alpha.data().data()};
    write_png_planes(path, planes, 1, alpha.width(), alpha.height(), bit_depth);
}

} // namespace fgmatte
