#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "porelab/error.hpp"

namespace porelab {

/// (channels, depth, height, width); width varies fastest.
struct Shape4 {
  std::int64_t c = 0, d = 0, h = 0, w = 0;
  std::int64_t elements() const { return c * d * h * w; }
  std::int64_t spatial() const { return d * h * w; }
  bool operator==(const Shape4&) const = default;
  std::string str() const {
    return std::to_string(c) + "x" + std::to_string(d) + "x" + std::to_string(h) + "x" + std::to_string(w);
  }
};

/// Dense single-precision feature map.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape4 shape) : shape_(shape), data_(static_cast<std::size_t>(shape.elements()), 0.0f) {
    if (shape.c < 0 || shape.d < 0 || shape.h < 0 || shape.w < 0) throw ShapeError("negative tensor extent");
  }
  Tensor(Shape4 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    if (static_cast<std::int64_t>(data_.size()) != shape_.elements())
      throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
  }

  const Shape4& shape() const { return shape_; }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& at(std::int64_t c, std::int64_t z, std::int64_t y, std::int64_t x) {
    return data_[static_cast<std::size_t>(((c * shape_.d + z) * shape_.h + y) * shape_.w + x)];
  }
  float at(std::int64_t c, std::int64_t z, std::int64_t y, std::int64_t x) const {
    return data_[static_cast<std::size_t>(((c * shape_.d + z) * shape_.h + y) * shape_.w + x)];
  }

  std::span<float> channel(std::int64_t c) {
    return std::span<float>(data_).subspan(static_cast<std::size_t>(c * shape_.spatial()),
                                           static_cast<std::size_t>(shape_.spatial()));
  }
  std::span<const float> channel(std::int64_t c) const {
    return std::span<const float>(data_).subspan(static_cast<std::size_t>(c * shape_.spatial()),
                                                 static_cast<std::size_t>(shape_.spatial()));
  }

  bool operator==(const Tensor&) const = default;

 private:
  Shape4 shape_{};
  std::vector<float> data_;
};

/// Latent input z of shape (d, m, n, o).
using LatentVector = Tensor;

}  // namespace porelab
