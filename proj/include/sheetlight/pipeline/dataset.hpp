#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sheetlight/geom/sheet.hpp"

namespace sheetlight::pipeline {

namespace fs = std::filesystem;

/// Where frames live under the dataset root. `{seq}` is replaced by the
/// sequence id.
struct DatasetLayout {
    std::string image_dir = "image_02/{seq}";
    std::string depth_dir = "depth/{seq}";
    /// 16-bit depth PNGs store inverse depth times this factor.
    double depth_png_scale = 8.0;
};

struct FramePaths {
    std::string stem;
    long long index = 0;  // numeric value of the stem
    fs::path image;
    fs::path depth;

    bool operator==(const FramePaths&) const = default;
};

/// Pairs every `<stem>.png` image with `<stem>.pfm` (preferred) or
/// `<stem>.png` depth. Output is sorted by numeric stem regardless of input
/// order. Throws Error listing every image without a depth partner, or any
/// image whose stem is not a non-negative integer.
std::vector<FramePaths> pair_frames(const std::vector<fs::path>& images, const std::vector<fs::path>& depths);

/// Lists the image and depth directories of one sequence and pairs them.
/// A missing image directory is an error; a missing depth directory makes
/// every image an orphan.
std::vector<FramePaths> ingest_sequence(const fs::path& root, const std::string& sequence,
                                        const DatasetLayout& layout = {});

std::string expand_template(const std::string& pattern, const std::string& sequence);

/// Reads a `.pfm` (float inverse depth) or `.png` (8/16-bit, divided by
/// `png_scale`).
geom::InverseDepthMap load_inverse_depth(const fs::path& path, double png_scale = 8.0);

}  // namespace sheetlight::pipeline
