#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sheetlight/compose/relight.hpp"
#include "sheetlight/geom/sheet.hpp"
#include "sheetlight/light/lighting.hpp"
#include "sheetlight/pipeline/dataset.hpp"

namespace sheetlight::pipeline {

struct SequenceSpec {
    std::string id;
    double fov_deg = 90.0;
};

/// Batch augmentation settings, read from a JSON document. See README for
/// the schema. Relative paths are resolved against the config file's
/// directory.
struct AugmentConfig {
    fs::path dataset_root;
    fs::path output_root;
    std::vector<SequenceSpec> sequences;
    bool aspect_correction = false;
    light::LightingCondition source = light::default_source_lighting();
    light::SamplingRanges target_ranges;
    std::uint64_t seed = 0;
    int variants_per_frame = 4;
    geom::GeometryParams geometry;
    compose::RelightParams relight;
    DatasetLayout layout;
    bool dump_buffers = false;
    /// Frame workers; 0 uses default_worker_count().
    int workers = 0;
    /// Optional external shadow refiner command.
    std::string refiner_command;

    /// Checks every field and that the dataset root and each sequence's
    /// image directory exist. Throws InvalidParameter.
    void validate() const;
};

inline constexpr int kMaxVariantsPerFrame = 1000;

AugmentConfig parse_augment_config(const std::string& json_text, const fs::path& base_dir = ".");
AugmentConfig load_augment_config(const fs::path& path);

/// Canonical JSON of every setting that affects output pixels.
std::string canonical_parameters(const AugmentConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);

/// "fnv1a64:<16 hex digits>" of canonical_parameters().
std::string parameter_hash(const AugmentConfig& config);

}  // namespace sheetlight::pipeline
