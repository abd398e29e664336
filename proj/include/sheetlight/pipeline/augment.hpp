#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sheetlight/pipeline/config.hpp"

namespace sheetlight::pipeline {

inline constexpr int kManifestSchemaVersion = 1;

/// Seed for the lighting draws of one frame, derived from the config seed,
/// the sequence id and the frame stem only.
std::uint64_t frame_seed(std::uint64_t seed, const std::string& sequence, const std::string& stem);

std::string relit_file_name(const std::string& stem, int variant);

struct FrameFailure {
    std::string sequence;
    std::string stem;
    std::string message;
};

struct AugmentSummary {
    int sequences = 0;
    int frames = 0;
    int images_written = 0;
    std::vector<FrameFailure> failures;
    std::vector<fs::path> manifests;
};

/// Relights every frame of every sequence. Frames run on a worker pool;
/// each output is written atomically and the per-sequence manifest
/// (`<output_root>/<sequence>/manifest.json`) lists frames in order. Frame
/// failures are recorded and logged to `log`, and do not stop the batch.
/// Sequence-level failures (e.g. an orphan image) are reported the same way
/// with an empty stem.
AugmentSummary run_augment(const AugmentConfig& config, std::ostream* log = nullptr);

}  // namespace sheetlight::pipeline
