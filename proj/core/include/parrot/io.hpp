#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace parrot::io {

std::string read_file(const std::filesystem::path& path);

/// Splits on '\n'; a single trailing newline does not produce an empty last line.
/// Carriage returns are kept; callers trim where the format allows it.
std::vector<std::string> split_lines(std::string_view content);

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Parses each non-blank line as JSON and hands it to `visit` with its 1-based line number.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& visit);

/// Compact single-line UTF-8 rendering used for every JSONL output.
std::string dump_line(const nlohmann::ordered_json& value);

}  // namespace parrot::io
