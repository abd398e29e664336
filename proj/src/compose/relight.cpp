#include "sheetlight/compose/relight.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdlib>

#include "sheetlight/core/error.hpp"
#include "sheetlight/io/png.hpp"

namespace sheetlight::compose {

namespace {

template <class F>
auto run_stage(const char* name, std::vector<StageTiming>& timings, F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
        const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
        timings.push_back({name, ms.count()});
    };
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            finish();
        } else {
            auto result = fn();
            finish();
            return result;
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    return out + "'";
}

}  // namespace

void RelightParams::validate() const {
    if (!(penumbra_scale >= 0.0)) throw InvalidParameter("penumbra_scale must be >= 0");
    if (!(penumbra_max_px >= 0.0)) throw InvalidParameter("penumbra_max_px must be >= 0");
    if (!(ambient > 0.0 && ambient <= 1.0)) throw InvalidParameter("ambient must lie in (0, 1]");
    if (!(strength >= 0.0 && strength <= 1.0)) throw InvalidParameter("strength must lie in [0, 1]");
    if (!(default_k > 0.0f && default_k <= 1.0f)) throw InvalidParameter("default_k must lie in (0, 1]");
    if (!(shadow_bias > 0.0)) throw InvalidParameter("shadow_bias must be positive");
    if (workers < 1) throw InvalidParameter("workers must be >= 1");
}

RefinedShadowMap ClassicalRefiner::refine(const shadow::ShadowMap& coarse, const BufferSet&, ShadowRole) const {
    return refine_shadow_map(coarse, penumbra_scale_, max_radius_px_, workers_);
}

RefinedShadowMap ExternalRefiner::refine(const shadow::ShadowMap& coarse, const BufferSet& buffers,
                                         ShadowRole role) const {
    static std::atomic<unsigned> counter{0};
    const std::filesystem::path dir =
        scratch_ / ("refine_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir / "buffers");
    const auto coarse_png = (dir / "coarse.png").string();
    const auto refined_png = (dir / "refined.png").string();
    write_shadow_png(coarse_png, coarse);
    if (!buffers.normal_map.empty()) write_normal_png((dir / "buffers" / "normal.png").string(), buffers.normal_map);
    const Grid<float>& refl = role == ShadowRole::source ? buffers.reflectance_src : buffers.reflectance_map;
    if (!refl.empty()) io::write_png_gray8((dir / "buffers" / "reflectance.png").string(), refl);

    const std::string cmd = command_ + " --in " + shell_quote(coarse_png) + " --buffers " +
                            shell_quote((dir / "buffers").string()) + " --out " + shell_quote(refined_png);
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw Error("refinement plug-in failed (status " + std::to_string(status) + "): " + cmd);
    }
    const io::PngSamples png = io::read_png(refined_png);
    if (png.width != coarse.width || png.height != coarse.height) {
        throw Error("refinement plug-in wrote a map of the wrong size");
    }
    RefinedShadowMap out(png.width, png.height);
    for (int y = 0; y < png.height; ++y) {
        for (int x = 0; x < png.width; ++x) out(x, y) = float(png.at(x, y, 0) / png.max_value());
    }
    std::filesystem::remove_all(dir);
    return out;
}

FrameRelighter::FrameRelighter(RgbImage image, const geom::InverseDepthMap& depth, const geom::CameraModel& cam,
                               const light::LightingCondition& source, const geom::GeometryParams& geometry,
                               const RelightParams& params, std::shared_ptr<const ShadowRefiner> refiner)
    : image_(std::move(image)),
      cam_(cam),
      source_cond_(source.normalized()),
      params_(params),
      refiner_(std::move(refiner)),
      accel_({}, {}) {
    run_stage("validate", timings_, [&] {
        params_.validate();
        geometry.validate();
        cam_.validate();
        source_cond_.validate();
        if (image_.width() != cam_.width || image_.height() != cam_.height) {
            throw InvalidParameter("camera size does not match the image");
        }
        if (depth.width() != image_.width() || depth.height() != image_.height()) {
            throw InvalidParameter("depth map is " + std::to_string(depth.width()) + "x" +
                                   std::to_string(depth.height()) + " but image is " +
                                   std::to_string(image_.width()) + "x" + std::to_string(image_.height()));
        }
    });
    if (!refiner_) {
        refiner_ = std::make_shared<ClassicalRefiner>(params_.penumbra_scale, params_.penumbra_max_px, params_.workers);
    }

    const geom::ClampedDepth clamped =
        run_stage("clamp", timings_, [&] { return geom::clamp_inverse_depth(depth, geometry.d_min); });
    const geom::DepthGrid grid = run_stage("sample", timings_, [&] {
        return geom::sample_depth_grid(clamped, geometry.grid_size, geometry.depth_scale);
    });
    mesh_ = run_stage("mesh", timings_,
                            [&] { return geom::build_sheet_mesh(grid, cam_, geometry.max_edge_depth_ratio); });
    mesh_ = run_stage("smooth", timings_, [&] {
        return geom::laplacian_smooth(mesh_, geometry.smooth_iterations, geometry.smooth_lambda);
    });
    mesh_ = run_stage("normals", timings_, [&] { return geom::compute_normals(mesh_); });
    accel_ = run_stage("accel", timings_,
                       [&] { return shadow::Bvh::from_mesh(mesh_, params_.exclude_sky_occluders); });

    const Vec3 sun_src = light::sun_direction(source_cond_);
    run_stage("buffers", timings_, [&] {
        source_.sky = geom::classify_sky(clamped);
        source_.normal_map = shadow::render_normal_map(mesh_, cam_, params_.workers);
        source_.reflectance_src = shadow::render_reflectance(source_.normal_map, sun_src);
    });
    const shadow::ShadowCastOptions cast{params_.shadow_bias, 0.5f, params_.workers};
    source_.coarse_src = run_stage("shadow_src", timings_, [&] {
        return shadow::render_shadow_map(image_, mesh_, accel_, cam_, sun_src, cast);
    });
    source_.refined_src = run_stage("refine_src", timings_, [&] {
        return refiner_->refine(source_.coarse_src, source_, ShadowRole::source);
    });
    source_.attenuation = run_stage("attenuation", timings_, [&] {
        const float k = params_.default_k;
        return estimate_attenuation(image_, source_.refined_src, &source_.sky, {k, k, k});
    });
    shadow_free_ = run_stage("remove", timings_, [&] {
        return remove_shadows(image_, source_.refined_src, source_.attenuation.k);
    });
}

FrameResult FrameRelighter::relight(const light::LightingCondition& target_in) const {
    FrameResult result;
    result.buffers = source_;
    BufferSet& buf = result.buffers;
    auto& timings = result.timings;
    const light::LightingCondition target = target_in.normalized();
    run_stage("validate_target", timings, [&] { target.validate(); });
    const Vec3 sun_tgt = light::sun_direction(target);
    const shadow::ShadowCastOptions cast{params_.shadow_bias, 0.5f, params_.workers};

    buf.reflectance_map = run_stage("reflectance_tgt", timings,
                                    [&] { return shadow::render_reflectance(buf.normal_map, sun_tgt); });
    buf.coarse_tgt = run_stage("shadow_tgt", timings, [&] {
        return shadow::render_shadow_map(image_, mesh_, accel_, cam_, sun_tgt, cast);
    });
    buf.refined_tgt = run_stage("refine_tgt", timings,
                                [&] { return refiner_->refine(buf.coarse_tgt, buf, ShadowRole::target); });
    RgbImage out = run_stage("reshade", timings, [&] {
        return reshade(shadow_free_, buf.reflectance_src, buf.reflectance_map, source_cond_.ambient, target.ambient,
                       params_.strength);
    });
    out = run_stage("insert", timings, [&] { return insert_shadows(std::move(out), buf.refined_tgt, buf.attenuation.k); });
    if (params_.recolor_sky) {
        out = run_stage("sky", timings, [&] { return recolor_sky(std::move(out), buf.sky, target); });
    }
    result.relit = quantize_u8(std::move(out));
    return result;
}

FrameResult relight_frame(const RgbImage& image, const geom::InverseDepthMap& depth, const geom::CameraModel& cam,
                          const light::LightingCondition& source, const light::LightingCondition& target,
                          const geom::GeometryParams& geometry, const RelightParams& params) {
    const FrameRelighter relighter(image, depth, cam, source, geometry, params);
    FrameResult r = relighter.relight(target);
    r.timings.insert(r.timings.begin(), relighter.timings().begin(), relighter.timings().end());
    return r;
}

RgbImage quantize_u8(RgbImage image) {
    for (float& v : image.values()) v = float(to_u8(v)) / 255.0f;
    return image;
}

void write_shadow_png(const std::string& path, const shadow::ShadowMap& map) {
    std::vector<std::uint8_t> rgba(std::size_t(map.width) * std::size_t(map.height) * 4, 0);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const std::size_t o = (std::size_t(y) * std::size_t(map.width) + std::size_t(x)) * 4;
            if (!map.occluded(x, y)) continue;
            for (int c = 0; c < 3; ++c) rgba[o + std::size_t(c)] = to_u8(map.occluder_rgb.at(x, y, c));
            rgba[o + 3] = 255;
        }
    }
    io::write_png_rgba8(path, map.width, map.height, rgba);
}

void write_normal_png(const std::string& path, const Grid<Vec3>& normals) {
    RgbImage img(normals.width(), normals.height());
    for (int y = 0; y < normals.height(); ++y) {
        for (int x = 0; x < normals.width(); ++x) {
            const Vec3& n = normals(x, y);
            img.set(x, y, float(n.x * 0.5 + 0.5), float(n.y * 0.5 + 0.5), float(n.z * 0.5 + 0.5));
        }
    }
    io::write_png_rgb(path, img);
}

void write_buffer_dump(const std::string& dir_path, const FrameResult& r, int variant, bool with_source) {
    const std::filesystem::path dir(dir_path);
    const BufferSet& b = r.buffers;
    std::filesystem::create_directories(dir);
    const std::string i = std::to_string(variant);
    if (with_source) {
        write_normal_png((dir / "normal.png").string(), b.normal_map);
        io::write_png_gray8((dir / "reflectance.png").string(), b.reflectance_src);
        write_shadow_png((dir / "shadow_src.png").string(), b.coarse_src);
        io::write_png_gray8((dir / "refined_src.png").string(), b.refined_src);
        Grid<float> sky(b.sky.width(), b.sky.height());
        for (std::size_t k = 0; k < sky.size(); ++k) sky.values()[k] = b.sky.values()[k] ? 1.0f : 0.0f;
        io::write_png_gray8((dir / "sky.png").string(), sky);
    }
    io::write_png_gray8((dir / ("reflectance_tgt_" + i + ".png")).string(), b.reflectance_map);
    write_shadow_png((dir / ("shadow_tgt_" + i + ".png")).string(), b.coarse_tgt);
    io::write_png_gray8((dir / ("refined_tgt_" + i + ".png")).string(), b.refined_tgt);
    io::write_png_rgb((dir / ("relit_" + i + ".png")).string(), r.relit);
}

}  // namespace sheetlight::compose
