#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sheetlight/core/error.hpp"

namespace sheetlight {

/// Dense row-major 2D array. Row 0 is the top of the image.
template <class T>
class Grid {
public:
    Grid() = default;
    Grid(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(checked_size(width, height), fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }

    std::span<T> row(int y) { return {data_.data() + index(0, y), std::size_t(width_)}; }
    std::span<const T> row(int y) const { return {data_.data() + index(0, y), std::size_t(width_)}; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    bool same_shape(int w, int h) const noexcept { return w == width_ && h == height_; }
    template <class U>
    bool same_shape(const Grid<U>& o) const noexcept { return same_shape(o.width(), o.height()); }

    bool operator==(const Grid&) const = default;

private:
    static std::size_t checked_size(int w, int h) {
        if (w < 0 || h < 0) throw InvalidParameter("grid dimensions must be non-negative");
        return std::size_t(w) * std::size_t(h);
    }
    std::size_t index(int x, int y) const noexcept { return std::size_t(y) * std::size_t(width_) + std::size_t(x); }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

/// Per-pixel boolean; stored as bytes so rows are addressable spans.
using Mask = Grid<std::uint8_t>;

/// Interleaved RGB, float channels in [0, 1].
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, float fill = 0.0f)
        : width_(width), height_(height), data_(std::size_t(width) * std::size_t(height) * 3, fill) {
        if (width < 0 || height < 0) throw InvalidParameter("image dimensions must be non-negative");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return std::size_t(width_) * std::size_t(height_); }

    float& at(int x, int y, int c) { return data_[offset(x, y) + std::size_t(c)]; }
    float at(int x, int y, int c) const { return data_[offset(x, y) + std::size_t(c)]; }

    void set(int x, int y, float r, float g, float b) {
        const std::size_t o = offset(x, y);
        data_[o] = r;
        data_[o + 1] = g;
        data_[o + 2] = b;
    }

    std::span<float> row(int y) { return {data_.data() + offset(0, y), std::size_t(width_) * 3}; }
    std::span<const float> row(int y) const { return {data_.data() + offset(0, y), std::size_t(width_) * 3}; }

    std::span<float> values() noexcept { return data_; }
    std::span<const float> values() const noexcept { return data_; }

    template <class U>
    bool same_shape(const Grid<U>& g) const noexcept { return g.width() == width_ && g.height() == height_; }
    bool same_shape(const RgbImage& o) const noexcept { return o.width_ == width_ && o.height_ == height_; }

    bool operator==(const RgbImage&) const = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// 8-bit quantization used for every PNG written by the library.
inline std::uint8_t to_u8(float v) {
    const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    return static_cast<std::uint8_t>(c * 255.0f + 0.5f);
}

}  // namespace sheetlight
