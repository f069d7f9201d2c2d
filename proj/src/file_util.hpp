#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope::detail {

std::vector<std::byte> read_binary(const std::filesystem::path &path);
std::string read_text(const std::filesystem::path &path);
void write_binary(const std::filesystem::path &path, std::span<const std::byte> bytes);
void write_text(const std::filesystem::path &path, std::string_view text);

// RFC 4180 quoting when the field holds a comma, quote or line break.
std::string csv_field(std::string_view s);

} // namespace leakscope::detail
