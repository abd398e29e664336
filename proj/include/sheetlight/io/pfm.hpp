#pragma once

#include <string>

#include "sheetlight/core/image.hpp"

namespace sheetlight::io {

/// Reads a single-channel `Pf` portable float map. PFM stores rows bottom-up;
/// the returned grid has row 0 at the top. Both byte orders are accepted.
Grid<float> read_pfm(const std::string& path);

/// Writes a little-endian `Pf` file (scale -1).
void write_pfm(const std::string& path, const Grid<float>& values);

}  // namespace sheetlight::io
