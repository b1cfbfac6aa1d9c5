#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace aaetag::io {

/// Whole file as a string; InputError when it cannot be opened.
[[nodiscard]] std::string read_text_file(const std::filesystem::path &path);

/// Writes atomically enough for our purposes: to `path.tmp`, then renamed over `path`.
void write_text_file(const std::filesystem::path &path, std::string_view contents);

/// Parses JSON, rethrowing syntax errors as InputError prefixed with `what`.
[[nodiscard]] nlohmann::json parse_json(std::string_view text, std::string_view what);

[[nodiscard]] nlohmann::json load_json(const std::filesystem::path &path);

}  // namespace aaetag::io
