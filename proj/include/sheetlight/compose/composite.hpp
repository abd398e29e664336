#pragma once

// Per-pixel compositing operators under a multiplicative shadow model: a
// pixel under shadow strength s in [0, 1] and per-channel attenuation k is
// observed as lit * (1 - s (1 - k)).

#include "sheetlight/core/image.hpp"
#include "sheetlight/light/lighting.hpp"
#include "sheetlight/shadow/shadow_map.hpp"
#include "sheetlight/simd/kernels.hpp"

namespace sheetlight::compose {

/// Soft shadow strength per pixel: 0 fully lit, 1 full shadow.
using RefinedShadowMap = Grid<float>;

/// Turns the binary coarse map into soft attenuation. Each occluded pixel
/// contributes a normalised Gaussian of sigma = penumbra_scale * distance
/// (clamped to [0, max_radius_px]) truncated at 3 sigma; overlapping
/// contributions are summed and capped at 1. sigma = 0 keeps the pixel hard.
RefinedShadowMap refine_shadow_map(const shadow::ShadowMap& coarse, double penumbra_scale,
                                   double max_radius_px = 8.0, int workers = 1);

struct ShadowAttenuation {
    simd::Rgb k{0.4f, 0.4f, 0.4f};
    bool fallback = true;  // true when k is the default, not an estimate
    int shadowed_pixels = 0;
    int lit_pixels = 0;
};

inline constexpr float kDefaultAttenuation = 0.4f;
inline constexpr int kMinCohortPixels = 100;

/// k = median(shadowed) / median(lit) per channel, clamped to [0.15, 0.95].
/// Shadowed means s > 0.9, lit means s < 0.1; sky pixels are ignored. With
/// fewer than 100 pixels in either cohort, returns `default_k` flagged.
ShadowAttenuation estimate_attenuation(const RgbImage& image, const RefinedShadowMap& refined_src,
                                       const Mask* sky = nullptr,
                                       simd::Rgb default_k = {kDefaultAttenuation, kDefaultAttenuation,
                                                              kDefaultAttenuation});

/// out = in / (1 - s (1 - k)), clamped to [0, 1].
RgbImage remove_shadows(RgbImage image, const RefinedShadowMap& s, const simd::Rgb& k);

/// out = in (1 - s (1 - k)).
RgbImage insert_shadows(RgbImage image, const RefinedShadowMap& s, const simd::Rgb& k);

inline constexpr float kMinGain = 0.5f;
inline constexpr float kMaxGain = 2.0f;

/// Multiplies each pixel by lerp(1, (refl_tgt + ambient)/(refl_src + ambient),
/// strength), with the gain clamped to [0.5, 2].
RgbImage reshade(RgbImage image, const Grid<float>& refl_src, const Grid<float>& refl_tgt, double ambient,
                 double strength);

/// As above with separate source and target ambient levels:
/// gain = lerp(1, (refl_tgt + ambient_tgt)/(refl_src + ambient_src), strength).
RgbImage reshade(RgbImage image, const Grid<float>& refl_src, const Grid<float>& refl_tgt, double ambient_src,
                 double ambient_tgt, double strength);

/// Replaces masked pixels with a vertical gradient from the zenith colour
/// (topmost sky row) to the zenith colour lightened 40% toward white
/// (bottommost sky row), blended at 0.85 over the original.
RgbImage recolor_sky(RgbImage image, const Mask& sky, const light::LightingCondition& cond);

inline constexpr double kSkyBlend = 0.85;
inline constexpr double kHorizonLighten = 0.4;

}  // namespace sheetlight::compose
