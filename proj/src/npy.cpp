#include "leakscope/npy.hpp"

#include "file_util.hpp"
#include "leakscope/error.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string_view>

namespace leakscope::npy {

namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
// numpy.save pads the header so the payload starts on this boundary and
// reserves room for the first axis to grow to this many digits.
constexpr std::size_t kArrayAlign = 64;
constexpr std::size_t kGrowthAxisMaxDigits = 21;

[[noreturn]] void fail(std::size_t offset, const std::string &what) {
  throw IoError("npy: " + what + " (byte offset " + std::to_string(offset) + ")");
}

std::uint64_t load_le(const std::byte *p, std::size_t width) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < width; ++i)
    v |= static_cast<std::uint64_t>(std::to_integer<std::uint8_t>(p[i])) << (8 * i);
  return v;
}

// Parser for the Python-literal dict in the header, e.g.
// {'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }
class DictParser {
public:
  DictParser(std::string_view text, std::size_t base) : text_(text), base_(base) {}

  void parse(Header &out) {
    bool have_descr = false, have_order = false, have_shape = false;
    skip_ws();
    expect('{');
    for (;;) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::size_t key_at = pos_;
      const std::string key = parse_string();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        out.descr = parse_string();
        have_descr = true;
      } else if (key == "fortran_order") {
        out.fortran_order = parse_bool();
        have_order = true;
      } else if (key == "shape") {
        out.shape = parse_shape();
        have_shape = true;
      } else {
        fail(base_ + key_at, "unexpected header key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      skip_ws();
      expect('}');
      break;
    }
    if (!have_descr || !have_order || !have_shape)
      fail(base_ + pos_, "header dict lacks one of descr/fortran_order/shape");
  }

private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  void expect(char c) {
    if (peek() != c)
      fail(base_ + pos_, std::string("malformed header: expected '") + c + "'");
    ++pos_;
  }

  std::string parse_string() {
    const char quote = peek();
    if (quote != '\'' && quote != '"')
      fail(base_ + pos_, "malformed header: expected string literal");
    ++pos_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != quote)
      ++pos_;
    if (pos_ >= text_.size())
      fail(base_ + start, "malformed header: unterminated string");
    std::string s(text_.substr(start, pos_ - start));
    ++pos_;
    return s;
  }

  bool parse_bool() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail(base_ + pos_, "malformed header: expected True or False");
  }

  std::vector<std::size_t> parse_shape() {
    std::vector<std::size_t> dims;
    expect('(');
    for (;;) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek())))
        fail(base_ + pos_, "malformed header: expected shape dimension");
      std::size_t v = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        v = v * 10 + static_cast<std::size_t>(peek() - '0');
        ++pos_;
      }
      dims.push_back(v);
      skip_ws();
      if (peek() == ',')
        ++pos_;
      else if (peek() != ')')
        fail(base_ + pos_, "malformed header: expected ',' or ')' in shape");
    }
  }

  std::string_view text_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

} // namespace

Header parse_header(std::span<const std::byte> bytes) {
  if (bytes.size() < kMagic.size() ||
      std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0)
    fail(0, "missing NPY magic string");
  if (bytes.size() < 8)
    fail(bytes.size(), "truncated before version bytes");

  Header h;
  h.major_version = std::to_integer<int>(bytes[6]);
  h.minor_version = std::to_integer<int>(bytes[7]);
  std::size_t len_width = 0;
  if (h.major_version == 1)
    len_width = 2;
  else if (h.major_version == 2)
    len_width = 4;
  else
    fail(6, "unsupported NPY version " + std::to_string(h.major_version) + "." +
                std::to_string(h.minor_version));

  const std::size_t dict_at = 8 + len_width;
  if (bytes.size() < dict_at)
    fail(bytes.size(), "truncated before header length");
  const std::size_t header_len = load_le(bytes.data() + 8, len_width);
  if (bytes.size() < dict_at + header_len)
    fail(bytes.size(), "truncated header (declares " + std::to_string(header_len) + " bytes)");

  const std::string_view text(reinterpret_cast<const char *>(bytes.data() + dict_at), header_len);
  DictParser(text, dict_at).parse(h);
  h.payload_offset = dict_at + header_len;
  return h;
}

Matrix decode(std::span<const std::byte> bytes) {
  const Header h = parse_header(bytes);

  std::size_t width = 0;
  if (h.descr == "<f8")
    width = 8;
  else if (h.descr == "<f4")
    width = 4;
  else
    fail(8, "unsupported element type '" + h.descr + "' (accepted: '<f4', '<f8')");

  if (h.shape.size() != 2)
    fail(8, "expected a 2-D array, got " + std::to_string(h.shape.size()) + "-D");

  const std::size_t rows = h.shape[0];
  const std::size_t cols = h.shape[1];
  const std::size_t need = rows * cols * width;
  const std::size_t have = bytes.size() - h.payload_offset;
  if (have < need)
    fail(bytes.size(), "truncated payload: expected " + std::to_string(need) +
                           " bytes after offset " + std::to_string(h.payload_offset) +
                           ", found " + std::to_string(have));

  Matrix m(rows, cols);
  const std::byte *src = bytes.data() + h.payload_offset;
  for (std::size_t k = 0; k < rows * cols; ++k) {
    const std::uint64_t raw = load_le(src + k * width, width);
    const double v = width == 8 ? std::bit_cast<double>(raw)
                                : static_cast<double>(std::bit_cast<float>(
                                      static_cast<std::uint32_t>(raw)));
    if (h.fortran_order)
      m(k % rows, k / rows) = v;
    else
      m.data()[k] = v;
  }
  return m;
}

Matrix read(const std::filesystem::path &path) {
  const auto bytes = detail::read_binary(path);
  try {
    return decode(bytes);
  } catch (const IoError &e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::byte> encode(const Matrix &matrix) {
  if (matrix.empty())
    throw ValidationError("npy: refusing to write an empty matrix");

  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                     std::to_string(matrix.rows()) + ", " + std::to_string(matrix.cols()) +
                     "), }";
  dict.append(kGrowthAxisMaxDigits - std::to_string(matrix.rows()).size(), ' ');
  // magic(6) + version(2) + length(2) + dict + '\n' lands on kArrayAlign
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((kArrayAlign - unpadded % kArrayAlign) % kArrayAlign, ' ');
  dict.push_back('\n');

  std::vector<std::byte> out;
  out.reserve(10 + dict.size() + matrix.data().size() * 8);
  for (char c : kMagic)
    out.push_back(static_cast<std::byte>(c));
  out.push_back(std::byte{1});
  out.push_back(std::byte{0});
  out.push_back(static_cast<std::byte>(dict.size() & 0xff));
  out.push_back(static_cast<std::byte>((dict.size() >> 8) & 0xff));
  for (char c : dict)
    out.push_back(static_cast<std::byte>(c));
  for (double v : matrix.data()) {
    const auto raw = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i)
      out.push_back(static_cast<std::byte>((raw >> (8 * i)) & 0xff));
  }
  return out;
}

void write(const Matrix &matrix, const std::filesystem::path &path) {
  detail::write_binary(path, encode(matrix));
}

} // namespace leakscope::npy
