#pragma once

// Data-parallel per-pixel kernels. Each kernel has a portable scalar reference
// and, where the target supports it, an AVX2 variant chosen at runtime. The
// elementwise kernels perform the same IEEE operations in the same order in
// both variants, so their outputs are bit-identical; only the reductions
// (sum_squared_diff) differ by summation order.

#include <array>
#include <span>
#include <string_view>

namespace sheetlight::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best ISA supported by the running CPU.
Isa detected_isa();

/// ISA used by the dispatching entry points. Defaults to detected_isa()
/// unless SHEETLIGHT_SIMD=scalar is set in the environment.
Isa active_isa();

/// Overrides the dispatch target. Throws InvalidParameter if the CPU lacks it.
void set_active_isa(Isa isa);

bool isa_supported(Isa isa);

using Rgb = std::array<float, 3>;

/// rgb[3i+c] *= 1 - s[i]*(1 - k[c])
void shadow_insert(std::span<float> rgb, std::span<const float> s, const Rgb& k);

/// rgb[3i+c] = clamp(rgb[3i+c] / (1 - s[i]*(1 - k[c])), 0, 1)
void shadow_remove(std::span<float> rgb, std::span<const float> s, const Rgb& k);

/// rgb[3i+c] = clamp(rgb[3i+c] * g_i, 0, 1) with
/// g_i = clamp(1 + strength*((tgt_i + ambient_tgt)/(src_i + ambient_src) - 1), gain_min, gain_max)
void reshade(std::span<float> rgb, std::span<const float> refl_src, std::span<const float> refl_tgt,
             float ambient_src, float ambient_tgt, float strength, float gain_min, float gain_max);

/// y += a * x
void axpy(float a, std::span<const float> x, std::span<float> y);

/// sum_i (a_i - b_i)^2 accumulated in double precision
double sum_squared_diff(std::span<const float> a, std::span<const float> b);

/// Direct access to each variant, for equivalence tests and benchmarks.
namespace scalar {
void shadow_insert(std::span<float> rgb, std::span<const float> s, const Rgb& k);
void shadow_remove(std::span<float> rgb, std::span<const float> s, const Rgb& k);
void reshade(std::span<float> rgb, std::span<const float> refl_src, std::span<const float> refl_tgt,
             float ambient_src, float ambient_tgt, float strength, float gain_min, float gain_max);
void axpy(float a, std::span<const float> x, std::span<float> y);
double sum_squared_diff(std::span<const float> a, std::span<const float> b);
}  // namespace scalar

#if defined(SHEETLIGHT_HAVE_AVX2)
namespace avx2 {
void shadow_insert(std::span<float> rgb, std::span<const float> s, const Rgb& k);
void shadow_remove(std::span<float> rgb, std::span<const float> s, const Rgb& k);
void reshade(std::span<float> rgb, std::span<const float> refl_src, std::span<const float> refl_tgt,
             float ambient_src, float ambient_tgt, float strength, float gain_min, float gain_max);
void axpy(float a, std::span<const float> x, std::span<float> y);
double sum_squared_diff(std::span<const float> a, std::span<const float> b);
}  // namespace avx2
#endif

}  // namespace sheetlight::simd
