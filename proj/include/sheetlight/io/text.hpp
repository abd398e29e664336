#pragma once

#include <string>

namespace sheetlight::io {

std::string read_text(const std::string& path);

/// Writes `<path>.tmp` and renames it over `path`.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace sheetlight::io
