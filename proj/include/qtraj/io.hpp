#pragma once

#include <filesystem>
#include <string>

namespace qtraj {

// Shortest representation that round-trips.
std::string format_double(double v);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace qtraj
