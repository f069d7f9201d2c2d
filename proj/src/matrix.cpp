#include "leakscope/matrix.hpp"

#include "leakscope/error.hpp"

#include <string>

namespace leakscope {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw ValidationError("matrix buffer holds " + std::to_string(data_.size()) +
                          " values, expected " + std::to_string(rows_ * cols_));
}

} // namespace leakscope
