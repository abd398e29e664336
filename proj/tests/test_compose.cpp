#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "sheetlight/compose/composite.hpp"
#include "sheetlight/compose/relight.hpp"
#include "sheetlight/core/error.hpp"
#include "sheetlight/io/png.hpp"
#include "support/cube_fixture.hpp"
#include "support/synthetic.hpp"

using namespace sheetlight;
using namespace sheetlight::compose;
namespace fx = sheetlight::testing;

namespace {

RgbImage random_image(int w, int h, std::mt19937_64& rng, float lo = 0.0f, float hi = 1.0f) {
    std::uniform_real_distribution<float> u(lo, hi);
    RgbImage img(w, h);
    for (float& v : img.values()) v = u(rng);
    return img;
}

Grid<float> random_map(int w, int h, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Grid<float> g(w, h);
    for (float& v : g.values()) v = u(rng);
    return g;
}

shadow::ShadowMap half_plane(int w, int h, int edge_x, float distance) {
    shadow::ShadowMap m(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < edge_x; ++x) {
            m.occluded(x, y) = 1;
            m.occluder_distance(x, y) = distance;
            m.occluder_face(x, y) = 0;
        }
    }
    return m;
}

light::LightingCondition sun_at(double az, double el) {
    light::LightingCondition c;
    c.sun_azimuth_deg = az;
    c.sun_elevation_deg = el;
    return c;
}

double mean_abs_diff(const RgbImage& a, const RgbImage& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) sum += std::abs(double(a.values()[i]) - b.values()[i]);
    return sum / double(a.values().size());
}

}  // namespace

TEST(Refine, ZeroScaleKeepsBinaryMask) {
    shadow::ShadowMap m = half_plane(20, 10, 7, 30.0f);
    m.occluded(15, 3) = 1;
    m.occluder_distance(15, 3) = 4.0f;
    const RefinedShadowMap r = refine_shadow_map(m, 0.0);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 20; ++x) EXPECT_EQ(r(x, y), m.occluded(x, y) ? 1.0f : 0.0f);
}

TEST(Refine, EmptyMapStaysEmpty) {
    const RefinedShadowMap r = refine_shadow_map(shadow::ShadowMap(16, 9), 0.5);
    for (float v : r.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Refine, StepEdgeSpreadMatchesGaussian) {
    const int W = 160, H = 60, edge = 80;
    const double scale = 0.02, distance = 200.0, sigma = scale * distance;  // 4 px
    const RefinedShadowMap r = refine_shadow_map(half_plane(W, H, edge, float(distance)), scale, 8.0);

    // Direct convolution oracle on the middle row: every occluded column
    // contributes a truncated, normalised Gaussian.
    const int reach = int(std::ceil(3.0 * sigma));
    double norm = 0.0;
    for (int d = -reach; d <= reach; ++d) norm += std::exp(-d * d / (2.0 * sigma * sigma));
    std::vector<double> oracle(W, 0.0);
    for (int x = 0; x < W; ++x) {
        for (int sx = 0; sx < edge; ++sx) {
            const int d = x - sx;
            if (std::abs(d) <= reach) oracle[std::size_t(x)] += std::exp(-d * d / (2.0 * sigma * sigma)) / norm;
        }
        oracle[std::size_t(x)] = std::min(1.0, oracle[std::size_t(x)]);
    }
    const int y = H / 2;
    for (int x = 0; x < W; ++x) EXPECT_NEAR(r(x, y), oracle[std::size_t(x)], 1e-5) << x;

    // 10-90% transition width of a Gaussian edge is 2.563 sigma.
    auto crossing = [&](double level) {
        for (int x = 0; x + 1 < W; ++x) {
            const double a = r(x, y), b = r(x + 1, y);
            if (a >= level && b < level) return x + (a - level) / (a - b);
        }
        return -1.0;
    };
    const double width = crossing(0.1) - crossing(0.9);
    EXPECT_NEAR(width, 2.563 * sigma, 0.25);
}

TEST(Refine, RadiusIsClamped) {
    const RefinedShadowMap wide = refine_shadow_map(half_plane(120, 20, 60, 1000.0f), 1.0, 2.0);
    const RefinedShadowMap ref = refine_shadow_map(half_plane(120, 20, 60, 2.0f), 1.0, 100.0);
    EXPECT_TRUE(wide == ref);
    EXPECT_EQ(wide(60 + 7, 10), 0.0f);
}

TEST(Refine, ValuesInUnitRangeAndWorkerIndependent) {
    std::mt19937_64 rng(3);
    shadow::ShadowMap m(70, 50);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (int y = 0; y < 50; ++y)
        for (int x = 0; x < 70; ++x)
            if (u(rng) < 0.3f) {
                m.occluded(x, y) = 1;
                m.occluder_distance(x, y) = 400.0f * u(rng);
            }
    const RefinedShadowMap a = refine_shadow_map(m, 0.02, 8.0, 1);
    for (float v : a.values()) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
    for (int w : {2, 5, 16}) EXPECT_TRUE(a == refine_shadow_map(m, 0.02, 8.0, w));
    EXPECT_THROW(refine_shadow_map(m, -1.0), InvalidParameter);
}

TEST(Attenuation, RatioOfMedians) {
    RgbImage img(40, 20);
    RefinedShadowMap s(40, 20, 0.0f);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 40; ++x) {
            const bool shadowed = x < 20;
            const float v = shadowed ? 60.0f / 255.0f : 120.0f / 255.0f;
            img.set(x, y, v, v, v);
            s(x, y) = shadowed ? 1.0f : 0.0f;
        }
    const ShadowAttenuation a = estimate_attenuation(img, s);
    EXPECT_FALSE(a.fallback);
    for (float k : a.k) EXPECT_NEAR(k, 0.5f, 1e-6);
    EXPECT_EQ(a.shadowed_pixels, 400);
    EXPECT_EQ(a.lit_pixels, 400);
}

TEST(Attenuation, FallsBackWithoutShadows) {
    RgbImage img(30, 30, 0.5f);
    const ShadowAttenuation a = estimate_attenuation(img, RefinedShadowMap(30, 30, 0.0f));
    EXPECT_TRUE(a.fallback);
    for (float k : a.k) EXPECT_EQ(k, 0.4f);
}

TEST(Attenuation, BlueTintedShadows) {
    // Lit surface (0.6, 0.5, 0.4); skylight-filled shadow keeps more blue.
    const simd::Rgb truth{0.3f, 0.4f, 0.7f};
    RgbImage img(40, 20);
    RefinedShadowMap s(40, 20, 0.0f);
    Mask sky(40, 20, 0);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 40; ++x) {
            const float f = x < 20 ? 1.0f : 0.0f;
            s(x, y) = f;
            img.set(x, y, 0.6f * (f ? truth[0] : 1.0f), 0.5f * (f ? truth[1] : 1.0f), 0.4f * (f ? truth[2] : 1.0f));
            if (y < 2) {
                sky(x, y) = 1;
                img.set(x, y, 0.0f, 0.0f, 1.0f);  // sky pixels must be ignored
            }
        }
    const ShadowAttenuation a = estimate_attenuation(img, s, &sky);
    EXPECT_FALSE(a.fallback);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(a.k[c], truth[c], 1e-5);
    EXPECT_GT(a.k[2], a.k[0]);
}

TEST(Attenuation, ClampedToRange) {
    RgbImage img(30, 10);
    RefinedShadowMap s(30, 10, 0.0f);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 30; ++x) {
            s(x, y) = x < 15 ? 1.0f : 0.0f;
            const float v = x < 15 ? 0.01f : 0.9f;
            img.set(x, y, v, v, v);
        }
    for (float k : estimate_attenuation(img, s).k) EXPECT_FLOAT_EQ(k, 0.15f);
}

TEST(RemoveInsert, Arithmetic) {
    RgbImage img(1, 1, 0.3f);
    RefinedShadowMap s(1, 1, 1.0f);
    EXPECT_FLOAT_EQ(remove_shadows(img, s, {0.5f, 0.5f, 0.5f}).at(0, 0, 0), 0.6f);
    img = RgbImage(1, 1, 0.6f);
    EXPECT_FLOAT_EQ(insert_shadows(img, s, {0.5f, 0.5f, 0.5f}).at(0, 0, 1), 0.3f);
}

TEST(RemoveInsert, ZeroShadowIsExactIdentity) {
    std::mt19937_64 rng(4);
    const RgbImage img = random_image(33, 17, rng);
    const RefinedShadowMap zero(33, 17, 0.0f);
    EXPECT_TRUE(remove_shadows(img, zero, {0.3f, 0.5f, 0.9f}) == img);
    EXPECT_TRUE(insert_shadows(img, zero, {0.3f, 0.5f, 0.9f}) == img);
}

TEST(RemoveInsert, RoundTripAwayFromClamp) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const RgbImage img = random_image(31, 23, rng);
        const RefinedShadowMap s = random_map(31, 23, rng);
        const simd::Rgb k{0.2f + 0.7f * float(trial % 5) / 5.0f, 0.45f, 0.8f};
        const RgbImage back = remove_shadows(insert_shadows(img, s, k), s, k);
        for (std::size_t i = 0; i < img.values().size(); ++i) {
            EXPECT_NEAR(back.values()[i], img.values()[i], 1.0 / 255.0);
        }
    }
}

TEST(RemoveInsert, EnergyDirection) {
    std::mt19937_64 rng(6);
    const RgbImage img = random_image(25, 25, rng);
    const RefinedShadowMap s = random_map(25, 25, rng);
    const simd::Rgb k{0.4f, 0.5f, 0.6f};
    const RgbImage ins = insert_shadows(img, s, k), rem = remove_shadows(img, s, k);
    for (std::size_t i = 0; i < img.values().size(); ++i) {
        EXPECT_LE(ins.values()[i], img.values()[i]);
        EXPECT_GE(rem.values()[i], img.values()[i]);
    }
    // Raising s never brightens.
    RefinedShadowMap more = s;
    for (float& v : more.values()) v = std::min(1.0f, v + 0.2f);
    const RgbImage darker = insert_shadows(img, more, k);
    for (std::size_t i = 0; i < img.values().size(); ++i) EXPECT_LE(darker.values()[i], ins.values()[i]);
}

TEST(RemoveInsert, RejectsBadInput) {
    const RgbImage img(4, 4, 0.5f);
    EXPECT_THROW(insert_shadows(img, RefinedShadowMap(3, 4), {0.5f, 0.5f, 0.5f}), InvalidParameter);
    EXPECT_THROW(insert_shadows(img, RefinedShadowMap(4, 4), {0.0f, 0.5f, 0.5f}), InvalidParameter);
    EXPECT_THROW(remove_shadows(img, RefinedShadowMap(4, 4), {0.5f, 1.5f, 0.5f}), InvalidParameter);
}

TEST(Reshade, IdentityCases) {
    std::mt19937_64 rng(7);
    const RgbImage img = random_image(20, 10, rng);
    const Grid<float> a = random_map(20, 10, rng), b = random_map(20, 10, rng);
    EXPECT_TRUE(reshade(img, a, b, 0.2, 0.0) == img);
    EXPECT_TRUE(reshade(img, a, a, 0.2, 1.0) == img);
}

TEST(Reshade, GainClampsAtTwo) {
    const RgbImage img(1, 1, 0.25f);
    const RgbImage out = reshade(img, Grid<float>(1, 1, 0.2f), Grid<float>(1, 1, 0.6f), 0.2, 1.0);
    EXPECT_FLOAT_EQ(out.at(0, 0, 0), 0.5f);
    const RgbImage low = reshade(img, Grid<float>(1, 1, 1.0f), Grid<float>(1, 1, 0.0f), 0.05, 1.0);
    EXPECT_FLOAT_EQ(low.at(0, 0, 0), 0.125f);
    const RgbImage half = reshade(img, Grid<float>(1, 1, 0.2f), Grid<float>(1, 1, 0.4f), 0.2, 0.5);
    EXPECT_FLOAT_EQ(half.at(0, 0, 0), 0.25f * 1.25f);
}

TEST(Reshade, SeparateAmbients) {
    const RgbImage img(1, 1, 0.4f);
    const RgbImage out = reshade(img, Grid<float>(1, 1, 0.5f), Grid<float>(1, 1, 0.5f), 0.2, 0.4, 1.0);
    EXPECT_NEAR(out.at(0, 0, 2), 0.4f * (0.9f / 0.7f), 1e-6);
    EXPECT_THROW(reshade(img, Grid<float>(1, 1), Grid<float>(1, 1), 0.0, 1.0), InvalidParameter);
    EXPECT_THROW(reshade(img, Grid<float>(1, 1), Grid<float>(1, 1), 0.2, 1.5), InvalidParameter);
}

TEST(SkyRecolor, EmptyMaskIsIdentity) {
    std::mt19937_64 rng(8);
    const RgbImage img = random_image(12, 9, rng);
    EXPECT_TRUE(recolor_sky(img, Mask(12, 9, 0), light::default_source_lighting()) == img);
}

TEST(SkyRecolor, GradientEndpoints) {
    const int W = 5, H = 7;
    const RgbImage img(W, H, 0.5f);
    light::LightingCondition c;
    c.sky_zenith_color = {0.2, 0.4, 0.6};
    const RgbImage out = recolor_sky(img, Mask(W, H, 1), c);
    for (int x = 0; x < W; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
            const double z = c.sky_zenith_color[std::size_t(ch)];
            const double horizon = z + 0.4 * (1.0 - z);
            EXPECT_NEAR(out.at(x, 0, ch), 0.85 * z + 0.15 * 0.5, 1e-6);
            EXPECT_NEAR(out.at(x, H - 1, ch), 0.85 * horizon + 0.15 * 0.5, 1e-6);
            EXPECT_NEAR(out.at(x, 3, ch), 0.85 * (0.5 * z + 0.5 * horizon) + 0.15 * 0.5, 1e-6);
        }
    }
    // A one-row sky is all zenith.
    const RgbImage row = recolor_sky(RgbImage(W, 1, 0.0f), Mask(W, 1, 1), c);
    EXPECT_NEAR(row.at(2, 0, 0), 0.85 * 0.2, 1e-6);
}

TEST(SkyRecolor, NonSkyPixelsUntouched) {
    std::mt19937_64 rng(9);
    const RgbImage img = random_image(16, 16, rng);
    Mask sky(16, 16, 0);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 16; ++x) sky(x, y) = (x + y) % 3 != 0;
    const RgbImage out = recolor_sky(img, sky, light::default_source_lighting());
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            if (!sky(x, y))
                for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(x, y, c), img.at(x, y, c));
}

namespace {

struct StreetFrame {
    RgbImage image;
    geom::InverseDepthMap depth;
    geom::CameraModel cam;
};

StreetFrame street_frame(std::uint64_t seed, int w = 240, int h = 96, double src_el = 60.0) {
    const geom::CameraModel cam{90.0, w, h};
    const Vec3 sun = light::sun_direction(sun_at(0.0, src_el));
    fx::Rendered r = fx::render(fx::street_scene(seed), cam, sun);
    return {fx::quantized(r.image), geom::InverseDepthMap(r.inverse_depth), cam};
}

}  // namespace

TEST(Relight, SameLightingWithoutSkyRecolorIsNearIdentity) {
    const StreetFrame f = street_frame(1);
    RelightParams p;
    p.recolor_sky = false;
    const light::LightingCondition src = sun_at(0.0, 60.0);
    const FrameResult r = relight_frame(f.image, f.depth, f.cam, src, src, {}, p);
    ASSERT_EQ(r.relit.width(), f.image.width());
    ASSERT_EQ(r.relit.height(), f.image.height());
    EXPECT_LE(mean_abs_diff(r.relit, f.image), 2.0 / 255.0);
}

TEST(Relight, CubeShadowAppearsWithEstimatedDarkening) {
    fx::CubeFixture fx;
    fx.size = 128;
    const geom::CameraModel cam{fx.fov_deg, fx.size, fx.size};
    const fx::Rendered src = fx::render(fx::cube_scene(fx), cam);
    const fx::Rendered truth = fx::render(fx::cube_scene(fx), cam, light::sun_direction(sun_at(0, 45)));
    geom::GeometryParams g;
    g.smooth_iterations = 0;
    RelightParams p;
    p.recolor_sky = false;
    const FrameResult r = relight_frame(src.image, geom::InverseDepthMap(src.inverse_depth), cam, sun_at(0, 90),
                                        sun_at(0, 45), g, p);
    const float k = r.buffers.attenuation.k[0];
    EXPECT_TRUE(r.buffers.attenuation.fallback);
    EXPECT_EQ(r.buffers.coarse_src.occluded_count(), 0u);

    // Deep-shadow ground pixels versus lit ground in the same row, on columns
    // away from the box silhouette.
    const double inner = 0.6 * fx.half_width / (fx.front_z + fx.depth);
    const int half = int(inner / cam.tan_x() * fx.size / 2);
    const int first = fx.size / 2 - half, last = fx.size / 2 + half - 1;
    int shadow_px = 0, agree = 0;
    double worst = 0.0;
    for (int y = 0; y < fx.size; ++y) {
        int lit_x = -1;
        for (int x = 0; x < fx.size; ++x)
            if (truth.object(x, y) == 0 && !truth.shadowed(x, y) && r.buffers.refined_tgt(x, y) == 0.0f) lit_x = x;
        if (lit_x < 0) continue;
        for (int x = first; x <= last; ++x) {
            if (truth.object(x, y) != 0 || r.buffers.refined_tgt(x, y) < 0.999f) continue;
            ++shadow_px;
            agree += truth.shadowed(x, y);
            const double ratio = r.relit.at(x, y, 1) / r.relit.at(lit_x, y, 1);
            worst = std::max(worst, std::abs(ratio - k));
        }
    }
    EXPECT_GT(shadow_px, 50);
    EXPECT_GE(agree, shadow_px * 9 / 10);
    EXPECT_LE(worst, 0.05);
}

TEST(Relight, SampledTargetsGiveDistinctDeterministicOutputs) {
    const StreetFrame f = street_frame(2);
    const light::LightingCondition src = sun_at(0.0, 60.0);
    const auto targets = light::sample_conditions(42, 4, light::SamplingRanges{});
    const FrameRelighter relighter(f.image, f.depth, f.cam, src, {}, {});
    std::vector<RgbImage> outs;
    for (const auto& t : targets) outs.push_back(relighter.relight(t).relit);
    for (std::size_t i = 0; i < outs.size(); ++i)
        for (std::size_t j = i + 1; j < outs.size(); ++j) EXPECT_FALSE(outs[i] == outs[j]);
    const FrameRelighter again(f.image, f.depth, f.cam, src, {}, {});
    for (std::size_t i = 0; i < outs.size(); ++i) EXPECT_TRUE(again.relight(targets[i]).relit == outs[i]);
}

TEST(Relight, WorkerCountDoesNotChangeOutput) {
    const StreetFrame f = street_frame(3);
    RelightParams one, many;
    many.workers = 6;
    const auto a = relight_frame(f.image, f.depth, f.cam, sun_at(0, 60), sun_at(120, 30), {}, one);
    const auto b = relight_frame(f.image, f.depth, f.cam, sun_at(0, 60), sun_at(120, 30), {}, many);
    EXPECT_TRUE(a.relit == b.relit);
    EXPECT_TRUE(a.buffers.refined_tgt == b.buffers.refined_tgt);
}

TEST(Relight, BuffersShareImageResolution) {
    const StreetFrame f = street_frame(4, 150, 70);
    const FrameResult r = relight_frame(f.image, f.depth, f.cam, sun_at(0, 60), sun_at(200, 40));
    EXPECT_TRUE(f.image.same_shape(r.buffers.normal_map));
    EXPECT_TRUE(f.image.same_shape(r.buffers.reflectance_map));
    EXPECT_TRUE(f.image.same_shape(r.buffers.refined_src));
    EXPECT_TRUE(f.image.same_shape(r.buffers.refined_tgt));
    EXPECT_TRUE(f.image.same_shape(r.buffers.sky));
    for (float v : r.buffers.reflectance_map.values()) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
    for (const StageTiming& t : r.timings) EXPECT_GE(t.milliseconds, 0.0);
}

TEST(Relight, StageErrorsNameTheStage) {
    const StreetFrame f = street_frame(5, 64, 32);
    const geom::InverseDepthMap wrong(Grid<float>(32, 32, 500.0f));
    try {
        relight_frame(f.image, wrong, f.cam, sun_at(0, 60), sun_at(0, 30));
        FAIL() << "expected a StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "validate");
        EXPECT_NE(std::string(e.what()).find("32x32"), std::string::npos);
    }
    try {
        relight_frame(f.image, f.depth, f.cam, sun_at(0, 60), sun_at(0, -5));
        FAIL() << "expected a StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "validate_target");
    }
}

TEST(Relight, ExternalRefinerPlugIn) {
    const StreetFrame f = street_frame(6, 96, 48);
    const auto scratch = fx::fresh_dir("refiner");
    auto ext = std::make_shared<ExternalRefiner>(SHEETLIGHT_REFINER_STUB, scratch);
    RelightParams zero;
    zero.penumbra_scale = 0.0;
    const FrameRelighter plug(f.image, f.depth, f.cam, sun_at(0, 60), {}, {}, ext);
    const FrameRelighter classic(f.image, f.depth, f.cam, sun_at(0, 60), {}, zero);
    // The stub returns the hard mask, which equals classical refinement at zero penumbra.
    const FrameResult a = plug.relight(sun_at(90, 30)), b = classic.relight(sun_at(90, 30));
    EXPECT_TRUE(a.buffers.refined_tgt == b.buffers.refined_tgt);
    EXPECT_TRUE(a.relit == b.relit);

    ::setenv("SHEETLIGHT_STUB_FAIL", "1", 1);
    EXPECT_THROW(FrameRelighter(f.image, f.depth, f.cam, sun_at(0, 60), {}, {}, ext), StageError);
    ::unsetenv("SHEETLIGHT_STUB_FAIL");
}

TEST(Relight, BufferDumpLayout) {
    const StreetFrame f = street_frame(7, 64, 32);
    const FrameResult r = relight_frame(f.image, f.depth, f.cam, sun_at(0, 60), sun_at(45, 45));
    const auto dir = fx::fresh_dir("dump");
    write_buffer_dump(dir.string(), r, 0);
    write_buffer_dump(dir.string(), r, 1, false);
    for (const char* name : {"normal.png", "reflectance.png", "shadow_src.png", "refined_src.png", "sky.png",
                             "reflectance_tgt_0.png", "shadow_tgt_0.png", "refined_tgt_0.png", "relit_0.png",
                             "shadow_tgt_1.png", "refined_tgt_1.png", "relit_1.png"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    }
    EXPECT_TRUE(io::read_png_rgb((dir / "relit_0.png").string()) == r.relit);
}
