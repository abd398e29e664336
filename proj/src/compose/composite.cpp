#include "sheetlight/compose/composite.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sheetlight/core/error.hpp"
#include "sheetlight/core/parallel.hpp"

namespace sheetlight::compose {

namespace {

void require_shape(const RgbImage& image, const Grid<float>& map, const char* what) {
    if (!image.same_shape(map)) throw InvalidParameter(std::string(what) + " does not match the image size");
}

void require_k(const simd::Rgb& k) {
    for (float c : k) {
        if (!(c > 0.0f && c <= 1.0f)) throw InvalidParameter("attenuation channels must lie in (0, 1]");
    }
}

}  // namespace

RefinedShadowMap refine_shadow_map(const shadow::ShadowMap& coarse, double penumbra_scale, double max_radius_px,
                                   int workers) {
    if (!(penumbra_scale >= 0.0)) throw InvalidParameter("penumbra_scale must be >= 0");
    if (!(max_radius_px >= 0.0)) throw InvalidParameter("max_radius_px must be >= 0");
    const int w = coarse.width, h = coarse.height;

    Grid<float> sigma(w, h, 0.0f);
    int max_reach = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!coarse.occluded(x, y)) continue;
            const double s = std::min(penumbra_scale * coarse.occluder_distance(x, y), max_radius_px);
            sigma(x, y) = float(s);
            max_reach = std::max(max_reach, int(std::ceil(3.0 * s)));
        }
    }

    RefinedShadowMap out(w, h, 0.0f);
    // Each chunk owns a band of output rows and gathers splats from every
    // source row that can reach it, in raster order, so the per-pixel sum
    // order is independent of how rows are split across workers.
    parallel_for(h, workers, [&](int row_begin, int row_end) {
        std::vector<double> acc(std::size_t(w) * std::size_t(row_end - row_begin), 0.0);
        std::vector<double> taps;
        const int src_begin = std::max(0, row_begin - max_reach);
        const int src_end = std::min(h, row_end + max_reach);
        for (int sy = src_begin; sy < src_end; ++sy) {
            for (int sx = 0; sx < w; ++sx) {
                if (!coarse.occluded(sx, sy)) continue;
                const double s = sigma(sx, sy);
                const int reach = int(std::ceil(3.0 * s));
                if (sy + reach < row_begin || sy - reach >= row_end) continue;
                if (reach == 0) {
                    if (sy >= row_begin && sy < row_end) acc[std::size_t(sy - row_begin) * std::size_t(w) + std::size_t(sx)] += 1.0;
                    continue;
                }
                taps.resize(std::size_t(2 * reach + 1));
                double norm1d = 0.0;
                for (int d = -reach; d <= reach; ++d) {
                    const double g = std::exp(-double(d * d) / (2.0 * s * s));
                    taps[std::size_t(d + reach)] = g;
                    norm1d += g;
                }
                const double norm = norm1d * norm1d;
                const int y0 = std::max(row_begin, sy - reach), y1 = std::min(row_end - 1, sy + reach);
                const int x0 = std::max(0, sx - reach), x1 = std::min(w - 1, sx + reach);
                for (int y = y0; y <= y1; ++y) {
                    const double gy = taps[std::size_t(y - sy + reach)] / norm;
                    double* dst = acc.data() + std::size_t(y - row_begin) * std::size_t(w);
                    for (int x = x0; x <= x1; ++x) dst[x] += gy * taps[std::size_t(x - sx + reach)];
                }
            }
        }
        for (int y = row_begin; y < row_end; ++y) {
            for (int x = 0; x < w; ++x) {
                out(x, y) = float(std::min(1.0, acc[std::size_t(y - row_begin) * std::size_t(w) + std::size_t(x)]));
            }
        }
    });
    return out;
}

ShadowAttenuation estimate_attenuation(const RgbImage& image, const RefinedShadowMap& refined_src, const Mask* sky,
                                       simd::Rgb default_k) {
    require_shape(image, refined_src, "refined shadow map");
    if (sky && !image.same_shape(*sky)) throw InvalidParameter("sky mask does not match the image size");
    std::array<std::vector<float>, 3> shadowed, lit;
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            if (sky && (*sky)(x, y)) continue;
            const float s = refined_src(x, y);
            auto* cohort = s > 0.9f ? &shadowed : (s < 0.1f ? &lit : nullptr);
            if (!cohort) continue;
            for (int c = 0; c < 3; ++c) (*cohort)[std::size_t(c)].push_back(image.at(x, y, c));
        }
    }
    ShadowAttenuation out;
    out.k = default_k;
    out.fallback = true;
    out.shadowed_pixels = int(shadowed[0].size());
    out.lit_pixels = int(lit[0].size());
    if (out.shadowed_pixels < kMinCohortPixels || out.lit_pixels < kMinCohortPixels) return out;

    auto median = [](std::vector<float>& v) {
        const auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        if (v.size() % 2 == 1) return double(*mid);
        const float below = *std::max_element(v.begin(), mid);
        return 0.5 * (double(below) + double(*mid));
    };
    simd::Rgb k{};
    for (std::size_t c = 0; c < 3; ++c) {
        const double lit_median = median(lit[c]);
        if (!(lit_median > 0.0)) return out;
        k[c] = float(std::clamp(median(shadowed[c]) / lit_median, 0.15, 0.95));
    }
    out.k = k;
    out.fallback = false;
    return out;
}

RgbImage remove_shadows(RgbImage image, const RefinedShadowMap& s, const simd::Rgb& k) {
    require_shape(image, s, "refined shadow map");
    require_k(k);
    simd::shadow_remove(image.values(), s.values(), k);
    return image;
}

RgbImage insert_shadows(RgbImage image, const RefinedShadowMap& s, const simd::Rgb& k) {
    require_shape(image, s, "refined shadow map");
    require_k(k);
    simd::shadow_insert(image.values(), s.values(), k);
    return image;
}

RgbImage reshade(RgbImage image, const Grid<float>& refl_src, const Grid<float>& refl_tgt, double ambient,
                 double strength) {
    return reshade(std::move(image), refl_src, refl_tgt, ambient, ambient, strength);
}

RgbImage reshade(RgbImage image, const Grid<float>& refl_src, const Grid<float>& refl_tgt, double ambient_src,
                 double ambient_tgt, double strength) {
    require_shape(image, refl_src, "source reflectance");
    require_shape(image, refl_tgt, "target reflectance");
    if (!(strength >= 0.0 && strength <= 1.0)) throw InvalidParameter("reshade strength must lie in [0, 1]");
    if (!(ambient_src > 0.0) || !(ambient_tgt > 0.0)) throw InvalidParameter("ambient must be positive");
    simd::reshade(image.values(), refl_src.values(), refl_tgt.values(), float(ambient_src), float(ambient_tgt),
                  float(strength), kMinGain, kMaxGain);
    return image;
}

RgbImage recolor_sky(RgbImage image, const Mask& sky, const light::LightingCondition& cond) {
    if (!image.same_shape(sky)) throw InvalidParameter("sky mask does not match the image size");
    int top = -1, bottom = -1;
    for (int y = 0; y < sky.height(); ++y) {
        const auto row = sky.row(y);
        if (std::find(row.begin(), row.end(), std::uint8_t(1)) != row.end()) {
            if (top < 0) top = y;
            bottom = y;
        }
    }
    if (top < 0) return image;

    const light::Rgb& zenith = cond.sky_zenith_color;
    light::Rgb horizon{};
    for (std::size_t c = 0; c < 3; ++c) horizon[c] = zenith[c] + kHorizonLighten * (1.0 - zenith[c]);
    for (int y = top; y <= bottom; ++y) {
        const double t = bottom > top ? double(y - top) / double(bottom - top) : 0.0;
        for (int x = 0; x < image.width(); ++x) {
            if (!sky(x, y)) continue;
            for (int c = 0; c < 3; ++c) {
                const double grad = (1.0 - t) * zenith[std::size_t(c)] + t * horizon[std::size_t(c)];
                image.at(x, y, c) = float(kSkyBlend * grad + (1.0 - kSkyBlend) * image.at(x, y, c));
            }
        }
    }
    return image;
}

}  // namespace sheetlight::compose
