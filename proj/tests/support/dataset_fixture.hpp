#pragma once

// Writes a small KITTI-style dataset of synthetic street frames:
// <root>/image_02/<seq>/<stem>.png and <root>/depth/<seq>/<stem>.pfm.

#include <cstdio>
#include <filesystem>
#include <string>

#include "sheetlight/io/pfm.hpp"
#include "sheetlight/io/png.hpp"
#include "sheetlight/light/lighting.hpp"
#include "support/synthetic.hpp"

namespace sheetlight::testing {

inline std::string stem_of(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d", index);
    return buf;
}

inline void write_street_sequence(const std::filesystem::path& root, const std::string& seq, int frames, int width,
                                  int height, double fov_deg = 90.0) {
    namespace fs = std::filesystem;
    const fs::path img_dir = root / "image_02" / seq, depth_dir = root / "depth" / seq;
    fs::create_directories(img_dir);
    fs::create_directories(depth_dir);
    const geom::CameraModel cam{fov_deg, width, height};
    const Vec3 sun = light::sun_direction(light::default_source_lighting());
    for (int f = 0; f < frames; ++f) {
        const Rendered r = render(street_scene(std::uint64_t(100 + f)), cam, sun);
        io::write_png_rgb((img_dir / (stem_of(f) + ".png")).string(), r.image);
        io::write_pfm((depth_dir / (stem_of(f) + ".pfm")).string(), r.inverse_depth);
    }
}

/// Minimal augment config for one sequence under `root`.
inline std::string augment_config_json(const std::filesystem::path& root, const std::filesystem::path& out,
                                       const std::string& seq, std::uint64_t seed, int variants, int workers = 1) {
    return std::string("{\n") + "  \"dataset_root\": \"" + root.generic_string() + "\",\n" +
           "  \"output_root\": \"" + out.generic_string() + "\",\n" + "  \"sequences\": [\"" + seq + "\"],\n" +
           "  \"seed\": " + std::to_string(seed) + ",\n" + "  \"variants_per_frame\": " + std::to_string(variants) +
           ",\n" + "  \"workers\": " + std::to_string(workers) + "\n}\n";
}

}  // namespace sheetlight::testing
