#include "sheetlight/simd/kernels.hpp"

#include <algorithm>
#include <cstddef>

namespace sheetlight::simd::scalar {

namespace {

inline float clamp01(float v) { return std::min(std::max(v, 0.0f), 1.0f); }

}  // namespace

void shadow_insert(std::span<float> rgb, std::span<const float> s, const Rgb& k) {
    const Rgb one_minus_k{1.0f - k[0], 1.0f - k[1], 1.0f - k[2]};
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            const float f = 1.0f - s[i] * one_minus_k[c];
            rgb[3 * i + c] = rgb[3 * i + c] * f;
        }
    }
}

void shadow_remove(std::span<float> rgb, std::span<const float> s, const Rgb& k) {
    const Rgb one_minus_k{1.0f - k[0], 1.0f - k[1], 1.0f - k[2]};
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            const float f = 1.0f - s[i] * one_minus_k[c];
            rgb[3 * i + c] = clamp01(rgb[3 * i + c] / f);
        }
    }
}

void reshade(std::span<float> rgb, std::span<const float> refl_src, std::span<const float> refl_tgt,
             float ambient_src, float ambient_tgt, float strength, float gain_min, float gain_max) {
    for (std::size_t i = 0; i < refl_src.size(); ++i) {
        const float ratio = (refl_tgt[i] + ambient_tgt) / (refl_src[i] + ambient_src);
        const float g = std::min(std::max(1.0f + strength * (ratio - 1.0f), gain_min), gain_max);
        for (int c = 0; c < 3; ++c) rgb[3 * i + c] = clamp01(rgb[3 * i + c] * g);
    }
}

void axpy(float a, std::span<const float> x, std::span<float> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = y[i] + a * x[i];
}

double sum_squared_diff(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return acc;
}

}  // namespace sheetlight::simd::scalar
