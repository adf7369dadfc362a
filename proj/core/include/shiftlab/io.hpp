#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace shiftlab::io {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it over `path`, so
/// readers never observe a partially written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Calls `fn(line, line_number)` for every non-blank line; line numbers are
/// 1-based and count blank lines.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

} // namespace shiftlab::io
