#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fga::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Thrown when operand shapes do not fit an operation. The message carries
/// the offending dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major array. Rank-4 arrays use the batch x channel x height x
/// width layout throughout the library.
template <typename T>
class Array {
 public:
  Array() = default;
  explicit Array(Shape shape, T fill = T{0});
  Array(Shape shape, std::vector<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // Rank-4 accessors; no bounds checks.
  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  void fill(T value);
  Array& operator+=(const Array& other);

  bool operator==(const Array& other) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

/// Throws ShapeError unless `a` has exactly `expected` shape.
void require_shape(const Shape& actual, const Shape& expected, const char* what);
/// Throws ShapeError unless the shape is rank 4.
void require_rank4(const Shape& actual, const char* what);

}  // namespace fga::nn
