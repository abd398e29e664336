#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sheetlight/core/image.hpp"

namespace sheetlight::io {

/// Decoded PNG samples, one value per channel, row-major, no gamma applied.
struct PngSamples {
    int width = 0;
    int height = 0;
    int channels = 0;   // 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA
    int bit_depth = 0;  // 8 or 16
    std::vector<std::uint16_t> samples;

    std::uint16_t at(int x, int y, int c) const {
        return samples[(std::size_t(y) * std::size_t(width) + std::size_t(x)) * std::size_t(channels) + std::size_t(c)];
    }
    double max_value() const { return bit_depth == 16 ? 65535.0 : 255.0; }
};

PngSamples read_png(const std::string& path);

/// Reads any 8/16-bit PNG as RGB in [0, 1]; gray is replicated, alpha dropped.
RgbImage read_png_rgb(const std::string& path);

/// Reads the first channel of a PNG as raw integer values.
Grid<std::uint16_t> read_png_gray_raw(const std::string& path);

// Writers go through a sibling temporary file and rename, so a reader never
// observes a partially written file.
void write_png_rgb(const std::string& path, const RgbImage& image);
void write_png_gray8(const std::string& path, const Grid<float>& values);
void write_png_gray16(const std::string& path, const Grid<std::uint16_t>& values);
void write_png_rgba8(const std::string& path, int width, int height, const std::vector<std::uint8_t>& rgba);

}  // namespace sheetlight::io
