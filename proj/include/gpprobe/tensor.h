#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gpprobe {

// Row-major float32 tensor with a runtime shape.
class FloatTensor {
 public:
  FloatTensor() = default;
  explicit FloatTensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(ElementCount(shape_), 0.0f) {}
  FloatTensor(std::vector<std::size_t> shape, std::vector<float> data)
      : shape_(std::move(shape)), data_(std::move(data)) {}

  static std::size_t ElementCount(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return shape.empty() ? 0 : n;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const float> data() const { return data_; }
  std::span<float> mutable_data() { return data_; }

  // Contiguous innermost row addressed by all leading indices.
  std::span<const float> Row(std::initializer_list<std::size_t> leading) const {
    std::size_t offset = 0;
    std::size_t i = 0;
    for (std::size_t idx : leading) offset = offset * shape_[i++] + idx;
    std::size_t inner = 1;
    for (; i < shape_.size(); ++i) {
      offset *= shape_[i];
      inner *= shape_[i];
    }
    return std::span<const float>(data_).subspan(offset, inner);
  }

  float at(std::initializer_list<std::size_t> index) const {
    std::size_t offset = 0;
    std::size_t i = 0;
    for (std::size_t idx : index) offset = offset * shape_[i++] + idx;
    return data_[offset];
  }

  bool operator==(const FloatTensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<float> data_;
};

}  // namespace gpprobe
