#pragma once

#include "leakscope/matrix.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace leakscope::npy {

// Decoded NPY header fields.
struct Header {
  int major_version = 1;
  int minor_version = 0;
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
  std::size_t payload_offset = 0; // byte offset of the first array element
};

Header parse_header(std::span<const std::byte> bytes);

// Accepts NPY 1.0/2.0, dtypes '<f4' and '<f8', C or Fortran order, 2-D only.
// Float32 input is widened to double; Fortran-order input is transposed into
// row-major. Errors name the byte offset where decoding failed.
Matrix decode(std::span<const std::byte> bytes);
Matrix read(const std::filesystem::path &path);

// NPY 1.0, '<f8', C order, header laid out exactly as numpy.save does.
std::vector<std::byte> encode(const Matrix &matrix);
void write(const Matrix &matrix, const std::filesystem::path &path);

} // namespace leakscope::npy
