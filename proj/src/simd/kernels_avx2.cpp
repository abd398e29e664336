// Compiled with -mavx2 (and without -mfma, so every multiply-add rounds twice
// exactly like the scalar reference).
#include "sheetlight/simd/kernels.hpp"

#include <immintrin.h>

#include <cstddef>

namespace sheetlight::simd::avx2 {

namespace {

// Eight interleaved RGB pixels occupy three 8-lane registers. These index
// vectors broadcast per-pixel scalars into that layout.
inline void expand_per_pixel(__m256 s, __m256& a, __m256& b, __m256& c) {
    const __m256i ia = _mm256_setr_epi32(0, 0, 0, 1, 1, 1, 2, 2);
    const __m256i ib = _mm256_setr_epi32(2, 3, 3, 3, 4, 4, 4, 5);
    const __m256i ic = _mm256_setr_epi32(5, 5, 6, 6, 6, 7, 7, 7);
    a = _mm256_permutevar8x32_ps(s, ia);
    b = _mm256_permutevar8x32_ps(s, ib);
    c = _mm256_permutevar8x32_ps(s, ic);
}

struct ChannelPattern {
    __m256 a, b, c;
};

inline ChannelPattern channel_pattern(float k0, float k1, float k2) {
    return {_mm256_setr_ps(k0, k1, k2, k0, k1, k2, k0, k1), _mm256_setr_ps(k2, k0, k1, k2, k0, k1, k2, k0),
            _mm256_setr_ps(k1, k2, k0, k1, k2, k0, k1, k2)};
}

inline __m256 clamp01(__m256 v) {
    return _mm256_min_ps(_mm256_max_ps(v, _mm256_setzero_ps()), _mm256_set1_ps(1.0f));
}

inline __m256 attenuation(__m256 s, __m256 one_minus_k) {
    return _mm256_sub_ps(_mm256_set1_ps(1.0f), _mm256_mul_ps(s, one_minus_k));
}

}  // namespace

void shadow_insert(std::span<float> rgb, std::span<const float> s, const Rgb& k) {
    const ChannelPattern omk = channel_pattern(1.0f - k[0], 1.0f - k[1], 1.0f - k[2]);
    const std::size_t n = s.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 sa, sb, sc;
        expand_per_pixel(_mm256_loadu_ps(s.data() + i), sa, sb, sc);
        float* p = rgb.data() + 3 * i;
        _mm256_storeu_ps(p, _mm256_mul_ps(_mm256_loadu_ps(p), attenuation(sa, omk.a)));
        _mm256_storeu_ps(p + 8, _mm256_mul_ps(_mm256_loadu_ps(p + 8), attenuation(sb, omk.b)));
        _mm256_storeu_ps(p + 16, _mm256_mul_ps(_mm256_loadu_ps(p + 16), attenuation(sc, omk.c)));
    }
    scalar::shadow_insert(rgb.subspan(3 * i), s.subspan(i), k);
}

void shadow_remove(std::span<float> rgb, std::span<const float> s, const Rgb& k) {
    const ChannelPattern omk = channel_pattern(1.0f - k[0], 1.0f - k[1], 1.0f - k[2]);
    const std::size_t n = s.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 sa, sb, sc;
        expand_per_pixel(_mm256_loadu_ps(s.data() + i), sa, sb, sc);
        float* p = rgb.data() + 3 * i;
        _mm256_storeu_ps(p, clamp01(_mm256_div_ps(_mm256_loadu_ps(p), attenuation(sa, omk.a))));
        _mm256_storeu_ps(p + 8, clamp01(_mm256_div_ps(_mm256_loadu_ps(p + 8), attenuation(sb, omk.b))));
        _mm256_storeu_ps(p + 16, clamp01(_mm256_div_ps(_mm256_loadu_ps(p + 16), attenuation(sc, omk.c))));
    }
    scalar::shadow_remove(rgb.subspan(3 * i), s.subspan(i), k);
}

void reshade(std::span<float> rgb, std::span<const float> refl_src, std::span<const float> refl_tgt,
             float ambient_src, float ambient_tgt, float strength, float gain_min, float gain_max) {
    const __m256 amb_src = _mm256_set1_ps(ambient_src);
    const __m256 amb_tgt = _mm256_set1_ps(ambient_tgt);
    const __m256 str = _mm256_set1_ps(strength);
    const __m256 one = _mm256_set1_ps(1.0f);
    const __m256 lo = _mm256_set1_ps(gain_min);
    const __m256 hi = _mm256_set1_ps(gain_max);
    const std::size_t n = refl_src.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 ratio = _mm256_div_ps(_mm256_add_ps(_mm256_loadu_ps(refl_tgt.data() + i), amb_tgt),
                                           _mm256_add_ps(_mm256_loadu_ps(refl_src.data() + i), amb_src));
        __m256 g = _mm256_add_ps(one, _mm256_mul_ps(str, _mm256_sub_ps(ratio, one)));
        g = _mm256_min_ps(_mm256_max_ps(g, lo), hi);
        __m256 ga, gb, gc;
        expand_per_pixel(g, ga, gb, gc);
        float* p = rgb.data() + 3 * i;
        _mm256_storeu_ps(p, clamp01(_mm256_mul_ps(_mm256_loadu_ps(p), ga)));
        _mm256_storeu_ps(p + 8, clamp01(_mm256_mul_ps(_mm256_loadu_ps(p + 8), gb)));
        _mm256_storeu_ps(p + 16, clamp01(_mm256_mul_ps(_mm256_loadu_ps(p + 16), gc)));
    }
    scalar::reshade(rgb.subspan(3 * i), refl_src.subspan(i), refl_tgt.subspan(i), ambient_src, ambient_tgt, strength, gain_min,
                    gain_max);
}

void axpy(float a, std::span<const float> x, std::span<float> y) {
    const __m256 va = _mm256_set1_ps(a);
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x.data() + i));
        _mm256_storeu_ps(y.data() + i, _mm256_add_ps(_mm256_loadu_ps(y.data() + i), prod));
    }
    scalar::axpy(a, x.subspan(i), y.subspan(i));
}

double sum_squared_diff(std::span<const float> a, std::span<const float> b) {
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(a.data() + i);
        const __m256 vb = _mm256_loadu_ps(b.data() + i);
        const __m256d dlo = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                                          _mm256_cvtps_pd(_mm256_castps256_ps128(vb)));
        const __m256d dhi = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                                          _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)));
        acc_lo = _mm256_add_pd(acc_lo, _mm256_mul_pd(dlo, dlo));
        acc_hi = _mm256_add_pd(acc_hi, _mm256_mul_pd(dhi, dhi));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, _mm256_add_pd(acc_lo, acc_hi));
    const double head = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    return head + scalar::sum_squared_diff(a.subspan(i), b.subspan(i));
}

}  // namespace sheetlight::simd::avx2
