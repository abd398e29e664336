#pragma once

#include <string>

#include "sheetlight/geom/sheet.hpp"

namespace sheetlight::io {

/// Wavefront OBJ with vertices, per-vertex normals and triangle faces.
/// Sky vertices are tagged by a `g sky` group holding the sky faces.
void write_obj(const std::string& path, const geom::SheetMesh& mesh);

}  // namespace sheetlight::io
