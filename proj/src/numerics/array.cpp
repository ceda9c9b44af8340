#include "fga/numerics/array.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace fga::nn {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) { return fmt::format("({})", fmt::join(shape, "x")); }

template <typename T>
Array<T>::Array(Shape shape, T fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("array extents must be positive, got " + shape_str(shape_));
  }
}

template <typename T>
Array<T>::Array(Shape shape, std::vector<T> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_numel(shape_) != data_.size()) {
    throw ShapeError(fmt::format("shape {} needs {} values, got {}", shape_str(shape_),
                                 shape_numel(shape_), data_.size()));
  }
}

template <typename T>
void Array<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
Array<T>& Array<T>::operator+=(const Array& other) {
  require_shape(other.shape(), shape_, "accumulate");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

void require_shape(const Shape& actual, const Shape& expected, const char* what) {
  if (actual != expected) {
    throw ShapeError(fmt::format("{}: expected shape {}, got {}", what, shape_str(expected),
                                 shape_str(actual)));
  }
}

void require_rank4(const Shape& actual, const char* what) {
  if (actual.size() != 4) {
    throw ShapeError(fmt::format("{}: expected a rank-4 (N,C,H,W) tensor, got {}", what,
                                 shape_str(actual)));
  }
}

template class Array<float>;
template class Array<double>;

}  // namespace fga::nn
