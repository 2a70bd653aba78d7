#pragma once

#include <string>

namespace hankelid {

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a truncated file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace hankelid
