#pragma once

#include <string>
#include <vector>

#include "sheetlight/eval/mot.hpp"

namespace sheetlight::eval {

struct KittiParseOptions {
    /// Object types kept as detections (compared case-insensitively).
    std::vector<std::string> classes{"Car"};
};

/// Parses a KITTI tracking label file: whitespace-separated
///   frame track_id type truncated occluded alpha left top right bottom
///   [h w l x y z rotation_y [score]]
/// Blank lines and lines starting with '#' are skipped. DontCare rows go to
/// `dont_care`; rows of other unlisted types are dropped. Malformed rows
/// throw ParseError with the line number.
TrackingSequence parse_kitti_tracking(const std::string& path, const KittiParseOptions& options = {});

/// Same, from text already in memory. `source` names it in errors.
TrackingSequence parse_kitti_tracking_text(const std::string& text, const std::string& source = "<text>",
                                           const KittiParseOptions& options = {});

/// Writes detections in the same format (3D fields zeroed).
std::string format_kitti_tracking(const TrackingSequence& seq);

}  // namespace sheetlight::eval
