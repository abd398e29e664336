#include "sheetlight/io/png.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "sheetlight/core/error.hpp"

namespace sheetlight::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_png_raw(const std::string& path, int width, int height, int color_type, int bit_depth,
                   const std::vector<std::uint8_t>& bytes, int bytes_per_row) {
    const std::string tmp = path + ".tmp";
    {
        FilePtr f(std::fopen(tmp.c_str(), "wb"));
        if (!f) throw IoError(path, "cannot open for writing");

        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (!png) throw IoError(path, "png_create_write_struct failed");
        png_infop info = png_create_info_struct(png);
        if (!info || setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            f.reset();
            std::filesystem::remove(tmp);
            throw IoError(path, "PNG encoding failed");
        }
        png_init_io(png, f.get());
        png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, color_type, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        for (int y = 0; y < height; ++y) {
            png_write_row(png, bytes.data() + std::size_t(y) * std::size_t(bytes_per_row));
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(path, "rename failed: " + ec.message());
}

}  // namespace

PngSamples read_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError(path, "cannot open");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) throw IoError(path, "not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError(path, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    PngSamples out;
    std::vector<png_bytep> rows;
    std::vector<std::uint8_t> buffer;
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(path, "PNG decoding failed");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // native little-endian uint16
    png_read_update_info(png, info);

    out.width = int(png_get_image_width(png, info));
    out.height = int(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    bit_depth = png_get_bit_depth(png, info);
    out.bit_depth = bit_depth;
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * std::size_t(out.height));
    rows.resize(std::size_t(out.height));
    for (int y = 0; y < out.height; ++y) rows[std::size_t(y)] = buffer.data() + std::size_t(y) * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const std::size_t n = std::size_t(out.width) * std::size_t(out.height) * std::size_t(out.channels);
    out.samples.resize(n);
    if (bit_depth == 16) {
        for (int y = 0; y < out.height; ++y) {
            const auto* src = reinterpret_cast<const std::uint16_t*>(rows[std::size_t(y)]);
            const std::size_t w = std::size_t(out.width) * std::size_t(out.channels);
            std::copy(src, src + w, out.samples.begin() + std::ptrdiff_t(std::size_t(y) * w));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t w = std::size_t(out.width) * std::size_t(out.channels);
            out.samples[i] = rows[i / w][i % w];
        }
    }
    return out;
}

RgbImage read_png_rgb(const std::string& path) {
    const PngSamples png = read_png(path);
    RgbImage img(png.width, png.height);
    // Division rather than a reciprocal multiply, so 8-bit values read back
    // exactly as quantize_u8 produced them.
    const float max_value = float(png.max_value());
    const bool gray = png.channels < 3;
    for (int y = 0; y < png.height; ++y) {
        for (int x = 0; x < png.width; ++x) {
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = float(png.at(x, y, gray ? 0 : c)) / max_value;
        }
    }
    return img;
}

Grid<std::uint16_t> read_png_gray_raw(const std::string& path) {
    const PngSamples png = read_png(path);
    Grid<std::uint16_t> g(png.width, png.height);
    for (int y = 0; y < png.height; ++y) {
        for (int x = 0; x < png.width; ++x) g(x, y) = png.at(x, y, 0);
    }
    return g;
}

void write_png_rgb(const std::string& path, const RgbImage& image) {
    std::vector<std::uint8_t> bytes(image.values().size());
    const auto v = image.values();
    for (std::size_t i = 0; i < v.size(); ++i) bytes[i] = to_u8(v[i]);
    write_png_raw(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8, bytes, image.width() * 3);
}

void write_png_gray8(const std::string& path, const Grid<float>& values) {
    std::vector<std::uint8_t> bytes(values.size());
    const auto v = values.values();
    for (std::size_t i = 0; i < v.size(); ++i) bytes[i] = to_u8(v[i]);
    write_png_raw(path, values.width(), values.height(), PNG_COLOR_TYPE_GRAY, 8, bytes, values.width());
}

void write_png_gray16(const std::string& path, const Grid<std::uint16_t>& values) {
    std::vector<std::uint8_t> bytes(values.size() * 2);
    const auto v = values.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        bytes[2 * i] = std::uint8_t(v[i] >> 8);  // PNG is big-endian
        bytes[2 * i + 1] = std::uint8_t(v[i] & 0xff);
    }
    write_png_raw(path, values.width(), values.height(), PNG_COLOR_TYPE_GRAY, 16, bytes, values.width() * 2);
}

void write_png_rgba8(const std::string& path, int width, int height, const std::vector<std::uint8_t>& rgba) {
    if (rgba.size() != std::size_t(width) * std::size_t(height) * 4) {
        throw InvalidParameter("RGBA buffer size does not match dimensions");
    }
    write_png_raw(path, width, height, PNG_COLOR_TYPE_RGB_ALPHA, 8, rgba, width * 4);
}

}  // namespace sheetlight::io
