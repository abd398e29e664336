#include "sheetlight/pipeline/config.hpp"

#include <cstdio>
#include <initializer_list>

#include <json.hpp>

#include "sheetlight/core/error.hpp"
#include "sheetlight/io/text.hpp"

namespace sheetlight::pipeline {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidParameter(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw InvalidParameter("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& into, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        into = it->get<T>();
    } catch (const json::exception&) {
        throw InvalidParameter(where + "." + key + " has the wrong type");
    }
}

void read_range(const json& j, const char* key, double& lo, double& hi, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        throw InvalidParameter(where + "." + key + " must be [min, max]");
    }
    lo = (*it)[0].get<double>();
    hi = (*it)[1].get<double>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void parse_lighting(const json& j, light::LightingCondition& c, const std::string& where) {
    check_keys(j, {"sun", "sky", "ambient"}, where);
    if (const auto it = j.find("sun"); it != j.end()) {
        if (!it->is_array() || it->size() != 2) throw InvalidParameter(where + ".sun must be [azimuth, elevation]");
        c.sun_azimuth_deg = (*it)[0].get<double>();
        c.sun_elevation_deg = (*it)[1].get<double>();
    }
    if (const auto it = j.find("sky"); it != j.end()) c.sky_zenith_color = light::parse_hex_color(it->get<std::string>());
    read(j, "ambient", c.ambient, where);
}

ordered_json lighting_json(const light::LightingCondition& c) {
    ordered_json j;
    j["sun"] = {c.sun_azimuth_deg, c.sun_elevation_deg};
    j["sky"] = light::to_hex_color(c.sky_zenith_color);
    j["ambient"] = c.ambient;
    return j;
}

}  // namespace

void AugmentConfig::validate() const {
    if (dataset_root.empty()) throw InvalidParameter("dataset_root is required");
    if (output_root.empty()) throw InvalidParameter("output_root is required");
    if (sequences.empty()) throw InvalidParameter("sequences must list at least one sequence");
    if (variants_per_frame < 1 || variants_per_frame > kMaxVariantsPerFrame) {
        throw InvalidParameter("variants_per_frame must lie in [1, " + std::to_string(kMaxVariantsPerFrame) + "]");
    }
    if (workers < 0) throw InvalidParameter("workers must be >= 0");
    if (!(layout.depth_png_scale > 0.0)) throw InvalidParameter("layout.depth_png_scale must be positive");
    geometry.validate();
    relight.validate();
    source.validate();
    target_ranges.validate();
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const SequenceSpec& s = sequences[i];
        if (s.id.empty() || s.id.find('/') != std::string::npos || s.id == "." || s.id == "..") {
            throw InvalidParameter("sequence id '" + s.id + "' is not a plain directory name");
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (sequences[k].id == s.id) throw InvalidParameter("sequence '" + s.id + "' is listed twice");
        }
        geom::CameraModel cam{s.fov_deg, 1, 1, aspect_correction};
        cam.validate();
    }
    if (!fs::is_directory(dataset_root)) {
        throw InvalidParameter("dataset_root does not exist: " + dataset_root.string());
    }
    for (const SequenceSpec& s : sequences) {
        const fs::path dir = dataset_root / expand_template(layout.image_dir, s.id);
        if (!fs::is_directory(dir)) throw InvalidParameter("image directory of sequence " + s.id + " not found: " + dir.string());
    }
}

AugmentConfig parse_augment_config(const std::string& json_text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidParameter(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc, {"dataset_root", "output_root", "sequences", "fov_deg", "aspect_correction", "seed",
                     "variants_per_frame", "dump_buffers", "workers", "source_lighting", "target_sampling", "geometry",
                     "relight", "layout", "refiner_command"},
               "config");

    AugmentConfig c;
    std::string root, out;
    read(doc, "dataset_root", root, "config");
    read(doc, "output_root", out, "config");
    if (!root.empty()) c.dataset_root = resolve(base_dir, root);
    if (!out.empty()) c.output_root = resolve(base_dir, out);

    double fov = 90.0;
    read(doc, "fov_deg", fov, "config");
    read(doc, "aspect_correction", c.aspect_correction, "config");
    if (const auto it = doc.find("sequences"); it != doc.end()) {
        if (!it->is_array()) throw InvalidParameter("config.sequences must be an array");
        for (const json& s : *it) {
            SequenceSpec spec{"", fov};
            if (s.is_string()) {
                spec.id = s.get<std::string>();
            } else {
                check_keys(s, {"id", "fov_deg"}, "config.sequences[]");
                read(s, "id", spec.id, "config.sequences[]");
                read(s, "fov_deg", spec.fov_deg, "config.sequences[]");
            }
            c.sequences.push_back(spec);
        }
    }
    if (const auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_integer()) throw InvalidParameter("config.seed must be an integer");
        c.seed = it->is_number_unsigned() ? it->get<std::uint64_t>() : std::uint64_t(it->get<std::int64_t>());
    }
    read(doc, "variants_per_frame", c.variants_per_frame, "config");
    read(doc, "dump_buffers", c.dump_buffers, "config");
    read(doc, "workers", c.workers, "config");
    read(doc, "refiner_command", c.refiner_command, "config");

    if (const auto it = doc.find("geometry"); it != doc.end()) {
        const std::string w = "config.geometry";
        check_keys(*it, {"d_min", "grid_size", "depth_scale", "smooth_iterations", "smooth_lambda",
                         "max_edge_depth_ratio"}, w);
        read(*it, "d_min", c.geometry.d_min, w);
        read(*it, "grid_size", c.geometry.grid_size, w);
        read(*it, "depth_scale", c.geometry.depth_scale, w);
        read(*it, "smooth_iterations", c.geometry.smooth_iterations, w);
        read(*it, "smooth_lambda", c.geometry.smooth_lambda, w);
        read(*it, "max_edge_depth_ratio", c.geometry.max_edge_depth_ratio, w);
    }
    if (const auto it = doc.find("relight"); it != doc.end()) {
        const std::string w = "config.relight";
        check_keys(*it, {"penumbra_scale", "penumbra_max_px", "ambient", "strength", "default_k", "recolor_sky",
                         "exclude_sky_occluders", "shadow_bias"}, w);
        read(*it, "penumbra_scale", c.relight.penumbra_scale, w);
        read(*it, "penumbra_max_px", c.relight.penumbra_max_px, w);
        read(*it, "ambient", c.relight.ambient, w);
        read(*it, "strength", c.relight.strength, w);
        read(*it, "default_k", c.relight.default_k, w);
        read(*it, "recolor_sky", c.relight.recolor_sky, w);
        read(*it, "exclude_sky_occluders", c.relight.exclude_sky_occluders, w);
        read(*it, "shadow_bias", c.relight.shadow_bias, w);
    }
    // Ambient defaults follow relight.ambient unless set explicitly.
    c.source.ambient = c.relight.ambient;
    c.target_ranges.ambient_min = c.target_ranges.ambient_max = c.relight.ambient;
    if (const auto it = doc.find("source_lighting"); it != doc.end()) parse_lighting(*it, c.source, "config.source_lighting");
    if (const auto it = doc.find("target_sampling"); it != doc.end()) {
        const std::string w = "config.target_sampling";
        check_keys(*it, {"azimuth_deg", "elevation_deg", "ambient", "sky_palette"}, w);
        read_range(*it, "azimuth_deg", c.target_ranges.azimuth_min_deg, c.target_ranges.azimuth_max_deg, w);
        read_range(*it, "elevation_deg", c.target_ranges.elevation_min_deg, c.target_ranges.elevation_max_deg, w);
        read_range(*it, "ambient", c.target_ranges.ambient_min, c.target_ranges.ambient_max, w);
        if (const auto pit = it->find("sky_palette"); pit != it->end()) {
            if (!pit->is_array()) throw InvalidParameter(w + ".sky_palette must be an array of #RRGGBB strings");
            c.target_ranges.sky_palette.clear();
            for (const json& col : *pit) c.target_ranges.sky_palette.push_back(light::parse_hex_color(col.get<std::string>()));
        }
    }
    if (const auto it = doc.find("layout"); it != doc.end()) {
        const std::string w = "config.layout";
        check_keys(*it, {"image_dir", "depth_dir", "depth_png_scale"}, w);
        read(*it, "image_dir", c.layout.image_dir, w);
        read(*it, "depth_dir", c.layout.depth_dir, w);
        read(*it, "depth_png_scale", c.layout.depth_png_scale, w);
    }
    return c;
}

AugmentConfig load_augment_config(const fs::path& path) {
    if (!fs::exists(path)) throw IoError(path.string(), "config file not found");
    return parse_augment_config(io::read_text(path.string()), path.parent_path().empty() ? "." : path.parent_path());
}

std::string canonical_parameters(const AugmentConfig& c) {
    ordered_json j;
    j["aspect_correction"] = c.aspect_correction;
    ordered_json seqs = ordered_json::array();
    for (const SequenceSpec& s : c.sequences) seqs.push_back({{"id", s.id}, {"fov_deg", s.fov_deg}});
    j["sequences"] = seqs;
    j["seed"] = c.seed;
    j["variants_per_frame"] = c.variants_per_frame;
    j["source_lighting"] = lighting_json(c.source);
    ordered_json palette = ordered_json::array();
    for (const auto& col : c.target_ranges.sky_palette) palette.push_back(light::to_hex_color(col));
    j["target_sampling"] = {{"azimuth_deg", {c.target_ranges.azimuth_min_deg, c.target_ranges.azimuth_max_deg}},
                            {"elevation_deg", {c.target_ranges.elevation_min_deg, c.target_ranges.elevation_max_deg}},
                            {"ambient", {c.target_ranges.ambient_min, c.target_ranges.ambient_max}},
                            {"sky_palette", palette}};
    j["geometry"] = {{"d_min", c.geometry.d_min},
                     {"grid_size", c.geometry.grid_size},
                     {"depth_scale", c.geometry.depth_scale},
                     {"smooth_iterations", c.geometry.smooth_iterations},
                     {"smooth_lambda", c.geometry.smooth_lambda},
                     {"max_edge_depth_ratio", c.geometry.max_edge_depth_ratio}};
    j["relight"] = {{"penumbra_scale", c.relight.penumbra_scale},
                    {"penumbra_max_px", c.relight.penumbra_max_px},
                    {"ambient", c.relight.ambient},
                    {"strength", c.relight.strength},
                    {"default_k", c.relight.default_k},
                    {"recolor_sky", c.relight.recolor_sky},
                    {"exclude_sky_occluders", c.relight.exclude_sky_occluders},
                    {"shadow_bias", c.relight.shadow_bias}};
    j["layout"] = {{"image_dir", c.layout.image_dir},
                   {"depth_dir", c.layout.depth_dir},
                   {"depth_png_scale", c.layout.depth_png_scale}};
    j["refiner_command"] = c.refiner_command;
    return j.dump();
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string parameter_hash(const AugmentConfig& config) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(canonical_parameters(config))));
    return buf;
}

}  // namespace sheetlight::pipeline
