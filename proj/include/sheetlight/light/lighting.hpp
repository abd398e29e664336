#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sheetlight/core/vec3.hpp"

namespace sheetlight::light {

using Rgb = std::array<double, 3>;

struct LightingCondition {
    double sun_azimuth_deg = 0.0;    // [0, 360)
    double sun_elevation_deg = 60.0;  // (0, 90]
    Rgb sky_zenith_color{0.35, 0.55, 0.85};
    double ambient = 0.2;

    /// Throws InvalidParameter on out-of-range fields.
    void validate() const;
    /// Same condition with azimuth wrapped into [0, 360).
    LightingCondition normalized() const;

    bool operator==(const LightingCondition&) const = default;
};

/// Default source lighting for daytime driving footage: sun 60 degrees up,
/// straight ahead. Operators are expected to tune this per sequence.
LightingCondition default_source_lighting();

/// Unit vector from the scene toward the sun in the camera frame:
/// (sin az cos el, sin el, cos az cos el).
Vec3 sun_direction(const LightingCondition& cond);

struct SamplingRanges {
    double azimuth_min_deg = 0.0;
    double azimuth_max_deg = 360.0;   // exclusive
    double elevation_min_deg = 15.0;
    double elevation_max_deg = 75.0;
    std::vector<Rgb> sky_palette = default_sky_palette();
    double ambient_min = 0.2;
    double ambient_max = 0.2;

    static std::vector<Rgb> default_sky_palette();
    void validate() const;
};

/// Draws `n` conditions uniformly within `ranges`. The generator is
/// std::mt19937_64 seeded with `seed`; doubles are formed from the top 53
/// bits of each draw, so sequences are identical on every platform.
std::vector<LightingCondition> sample_conditions(std::uint64_t seed, int n, const SamplingRanges& ranges);

/// Parses "AZ,EL" (degrees).
void parse_sun(const std::string& text, LightingCondition& into);
/// Parses "#RRGGBB" into [0, 1] channels.
Rgb parse_hex_color(const std::string& text);
std::string to_hex_color(const Rgb& c);

}  // namespace sheetlight::light
