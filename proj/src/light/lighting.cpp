#include "sheetlight/light/lighting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "sheetlight/core/error.hpp"

namespace sheetlight::light {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

double wrap_degrees(double deg) {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    return r >= 360.0 ? 0.0 : r;
}

}  // namespace

void LightingCondition::validate() const {
    if (!std::isfinite(sun_azimuth_deg)) throw InvalidParameter("sun azimuth must be finite");
    if (!(sun_elevation_deg > 0.0 && sun_elevation_deg <= 90.0)) {
        throw InvalidParameter("sun elevation must lie in (0, 90] degrees");
    }
    for (double c : sky_zenith_color) {
        if (!in_unit(c)) throw InvalidParameter("sky colour channels must lie in [0, 1]");
    }
    if (!in_unit(ambient)) throw InvalidParameter("ambient must lie in [0, 1]");
}

LightingCondition LightingCondition::normalized() const {
    LightingCondition c = *this;
    c.sun_azimuth_deg = wrap_degrees(sun_azimuth_deg);
    return c;
}

LightingCondition default_source_lighting() {
    LightingCondition c;
    c.sun_azimuth_deg = 0.0;
    c.sun_elevation_deg = 60.0;
    return c;
}

Vec3 sun_direction(const LightingCondition& cond) {
    const double az = cond.sun_azimuth_deg * kDegToRad;
    const double el = cond.sun_elevation_deg * kDegToRad;
    const double ce = std::cos(el);
    return normalize(Vec3{std::sin(az) * ce, std::sin(el), std::cos(az) * ce});
}

std::vector<Rgb> SamplingRanges::default_sky_palette() {
    return {
        {0.35, 0.55, 0.85},  // clear noon blue
        {0.25, 0.42, 0.75},  // deep blue
        {0.55, 0.65, 0.80},  // hazy
        {0.85, 0.60, 0.45},  // low-sun warm
        {0.70, 0.72, 0.75},  // overcast grey
    };
}

void SamplingRanges::validate() const {
    if (!(azimuth_max_deg > azimuth_min_deg)) throw InvalidParameter("azimuth range is empty");
    if (!(elevation_max_deg >= elevation_min_deg)) throw InvalidParameter("elevation range is empty");
    if (!(elevation_min_deg > 0.0 && elevation_max_deg <= 90.0)) {
        throw InvalidParameter("elevation range must lie within (0, 90]");
    }
    if (sky_palette.empty()) throw InvalidParameter("sky palette is empty");
    for (const Rgb& c : sky_palette) {
        for (double v : c) {
            if (!in_unit(v)) throw InvalidParameter("sky palette colours must lie in [0, 1]");
        }
    }
    if (!(ambient_max >= ambient_min) || !in_unit(ambient_min) || !in_unit(ambient_max)) {
        throw InvalidParameter("ambient range must be a non-empty sub-interval of [0, 1]");
    }
}

std::vector<LightingCondition> sample_conditions(std::uint64_t seed, int n, const SamplingRanges& ranges) {
    if (n < 1) throw InvalidParameter("sample count must be >= 1");
    ranges.validate();
    std::mt19937_64 rng(seed);
    auto unit = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };  // [0, 1)
    std::vector<LightingCondition> out;
    out.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        LightingCondition c;
        c.sun_azimuth_deg =
            wrap_degrees(ranges.azimuth_min_deg + unit() * (ranges.azimuth_max_deg - ranges.azimuth_min_deg));
        c.sun_elevation_deg =
            ranges.elevation_min_deg + unit() * (ranges.elevation_max_deg - ranges.elevation_min_deg);
        const std::size_t pick = std::size_t(rng() % ranges.sky_palette.size());
        c.sky_zenith_color = ranges.sky_palette[pick];
        c.ambient = ranges.ambient_min + unit() * (ranges.ambient_max - ranges.ambient_min);
        out.push_back(c);
    }
    return out;
}

void parse_sun(const std::string& text, LightingCondition& into) {
    double az = 0.0, el = 0.0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf%c", &az, &el, &tail) != 2) {
        throw InvalidParameter("expected sun as AZ,EL in degrees, got '" + text + "'");
    }
    into.sun_azimuth_deg = wrap_degrees(az);
    into.sun_elevation_deg = el;
    into.validate();
}

Rgb parse_hex_color(const std::string& text) {
    unsigned r = 0, g = 0, b = 0;
    char tail = 0;
    if (text.size() != 7 || std::sscanf(text.c_str(), "#%2x%2x%2x%c", &r, &g, &b, &tail) != 3) {
        throw InvalidParameter("expected colour as #RRGGBB, got '" + text + "'");
    }
    return {r / 255.0, g / 255.0, b / 255.0};
}

std::string to_hex_color(const Rgb& c) {
    char buf[8];
    auto byte = [](double v) { return unsigned(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", byte(c[0]), byte(c[1]), byte(c[2]));
    return buf;
}

}  // namespace sheetlight::light
