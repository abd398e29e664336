#include "sheetlight/pipeline/augment.hpp"

#include <mutex>
#include <ostream>

#include <json.hpp>

#include "sheetlight/core/error.hpp"
#include "sheetlight/core/parallel.hpp"
#include "sheetlight/io/png.hpp"
#include "sheetlight/io/text.hpp"

namespace sheetlight::pipeline {

namespace {

using nlohmann::ordered_json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct FrameRecord {
    std::vector<light::LightingCondition> lighting;
    bool ok = false;
    std::string error;
    compose::ShadowAttenuation attenuation;
};

ordered_json lighting_json(const light::LightingCondition& c) {
    ordered_json j;
    j["sun_azimuth_deg"] = c.sun_azimuth_deg;
    j["sun_elevation_deg"] = c.sun_elevation_deg;
    j["sky_zenith"] = light::to_hex_color(c.sky_zenith_color);
    j["ambient"] = c.ambient;
    return j;
}

}  // namespace

std::uint64_t frame_seed(std::uint64_t seed, const std::string& sequence, const std::string& stem) {
    return splitmix64(splitmix64(seed ^ fnv1a64(sequence)) ^ fnv1a64(stem));
}

std::string relit_file_name(const std::string& stem, int variant) {
    return stem + "_relit_" + std::to_string(variant) + ".png";
}

AugmentSummary run_augment(const AugmentConfig& config, std::ostream* log) {
    config.validate();
    const int workers = config.workers > 0 ? config.workers : default_worker_count();
    const std::string hash = parameter_hash(config);
    std::mutex log_mutex;
    auto say = [&](const std::string& line) {
        if (!log) return;
        std::lock_guard lock(log_mutex);
        *log << line << '\n';
    };

    AugmentSummary summary;
    for (const SequenceSpec& seq : config.sequences) {
        ++summary.sequences;
        std::vector<FramePaths> frames;
        try {
            frames = ingest_sequence(config.dataset_root, seq.id, config.layout);
        } catch (const std::exception& e) {
            summary.failures.push_back({seq.id, "", e.what()});
            say("sequence " + seq.id + ": " + e.what());
            continue;
        }
        const fs::path out_dir = config.output_root / seq.id;
        fs::create_directories(out_dir);

        std::shared_ptr<const compose::ShadowRefiner> refiner;
        if (!config.refiner_command.empty()) {
            refiner = std::make_shared<compose::ExternalRefiner>(config.refiner_command, out_dir / ".scratch");
        }
        compose::RelightParams params = config.relight;
        params.workers = 1;  // parallelism is across frames

        std::vector<FrameRecord> records(frames.size());
        std::vector<int> written(frames.size(), 0);
        parallel_for(
            int(frames.size()), workers,
            [&](int begin, int end) {
                for (int f = begin; f < end; ++f) {
                    const FramePaths& fp = frames[std::size_t(f)];
                    FrameRecord& rec = records[std::size_t(f)];
                    rec.lighting = light::sample_conditions(frame_seed(config.seed, seq.id, fp.stem),
                                                            config.variants_per_frame, config.target_ranges);
                    try {
                        RgbImage image = io::read_png_rgb(fp.image.string());
                        const geom::InverseDepthMap depth = load_inverse_depth(fp.depth, config.layout.depth_png_scale);
                        const geom::CameraModel cam{seq.fov_deg, image.width(), image.height(), config.aspect_correction};
                        const compose::FrameRelighter relighter(std::move(image), depth, cam, config.source,
                                                                config.geometry, params, refiner);
                        rec.attenuation = relighter.source_buffers().attenuation;
                        for (int v = 0; v < config.variants_per_frame; ++v) {
                            const compose::FrameResult r = relighter.relight(rec.lighting[std::size_t(v)]);
                            io::write_png_rgb((out_dir / relit_file_name(fp.stem, v)).string(), r.relit);
                            ++written[std::size_t(f)];
                            if (config.dump_buffers) compose::write_buffer_dump((out_dir / "buffers" / fp.stem).string(), r, v, v == 0);
                        }
                        rec.ok = true;
                    } catch (const std::exception& e) {
                        rec.error = e.what();
                        say("frame " + seq.id + "/" + fp.stem + " failed: " + e.what());
                    }
                }
            },
            1);

        ordered_json manifest;
        manifest["schema_version"] = kManifestSchemaVersion;
        manifest["sequence"] = seq.id;
        manifest["seed"] = config.seed;
        manifest["parameter_hash"] = hash;
        manifest["variants_per_frame"] = config.variants_per_frame;
        manifest["fov_deg"] = seq.fov_deg;
        manifest["source_lighting"] = lighting_json(config.source);
        ordered_json list = ordered_json::array();
        for (std::size_t f = 0; f < frames.size(); ++f) {
            const FrameRecord& rec = records[f];
            ordered_json fj;
            fj["stem"] = frames[f].stem;
            fj["image"] = fs::relative(frames[f].image, config.dataset_root).generic_string();
            fj["depth"] = fs::relative(frames[f].depth, config.dataset_root).generic_string();
            fj["status"] = rec.ok ? "ok" : "failed";
            if (!rec.ok) fj["error"] = rec.error;
            if (rec.ok) {
                fj["attenuation"] = {rec.attenuation.k[0], rec.attenuation.k[1], rec.attenuation.k[2]};
                fj["attenuation_estimated"] = !rec.attenuation.fallback;
            }
            ordered_json variants = ordered_json::array();
            for (int v = 0; v < config.variants_per_frame; ++v) {
                ordered_json vj;
                vj["index"] = v;
                vj["file"] = relit_file_name(frames[f].stem, v);
                vj["lighting"] = lighting_json(rec.lighting[std::size_t(v)]);
                variants.push_back(vj);
            }
            fj["variants"] = variants;
            list.push_back(fj);

            summary.images_written += written[f];
            if (!rec.ok) summary.failures.push_back({seq.id, frames[f].stem, rec.error});
        }
        manifest["frames"] = list;
        const fs::path manifest_path = out_dir / "manifest.json";
        io::write_text_atomic(manifest_path.string(), manifest.dump(2) + "\n");
        summary.manifests.push_back(manifest_path);
        summary.frames += int(frames.size());
        std::error_code ec;
        fs::remove_all(out_dir / ".scratch", ec);
        say("sequence " + seq.id + ": " + std::to_string(frames.size()) + " frames");
    }
    return summary;
}

}  // namespace sheetlight::pipeline
