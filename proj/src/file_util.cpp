#include "file_util.hpp"

#include "leakscope/error.hpp"

#include <fstream>
#include <iterator>

namespace leakscope::detail {

namespace {

std::ifstream open_input(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

void ensure_parent(const std::filesystem::path &path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
      throw IoError("cannot create directory '" + path.parent_path().string() +
                    "': " + ec.message());
  }
}

} // namespace

std::vector<std::byte> read_binary(const std::filesystem::path &path) {
  auto in = open_input(path);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad())
    throw IoError("read failure on '" + path.string() + "'");
  std::vector<std::byte> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    out[i] = static_cast<std::byte>(raw[i]);
  return out;
}

std::string read_text(const std::filesystem::path &path) {
  auto in = open_input(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad())
    throw IoError("read failure on '" + path.string() + "'");
  return text;
}

void write_binary(const std::filesystem::path &path, std::span<const std::byte> bytes) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw IoError("write failure on '" + path.string() + "'");
}

void write_text(const std::filesystem::path &path, std::string_view text) {
  write_binary(path, std::as_bytes(std::span<const char>(text.data(), text.size())));
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += "\"\"";
    else
      out.push_back(c);
  }
  out += '"';
  return out;
}

} // namespace leakscope::detail
