#pragma once

#include <filesystem>
#include <string>

namespace dbosim {

// Shortest round-trippable decimal form, at least 9 significant digits.
std::string format_double(double x);

// Writes content to a temporary file in the target directory, then renames
// it over path, so readers never observe a partial file. Creates parent
// directories as needed.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace dbosim
