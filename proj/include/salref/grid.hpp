#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace salref {

// Dense row-major float tensor with 1 to 3 dimensions. Carries images
// (C x H x W), feature maps, and saliency maps (H x W).
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<int> shape, float fill = 0.0f);
  Grid(std::vector<int> shape, std::vector<float> data);

  int dims() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int extent(int d) const { return shape_[static_cast<std::size_t>(d)]; }
  std::size_t size() const { return data_.size(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // 2-d / 3-d accessors, row-major.
  float& at(int y, int x) { return data_[static_cast<std::size_t>(y) * shape_[1] + x]; }
  float at(int y, int x) const { return data_[static_cast<std::size_t>(y) * shape_[1] + x]; }
  float& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  float at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  bool all_finite() const;
  float max_value() const;  // 0 for empty grids

  bool same_shape(const Grid& other) const { return shape_ == other.shape_; }

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

// H x W map with values in [0, 1]; produced by the model's sigmoid head and
// by the ground-truth generator.
using SaliencyMap = Grid;

// H x W binary ground-truth fixation map.
struct FixationMap {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> values;  // 0 or 1, row-major

  FixationMap() = default;
  FixationMap(int h, int w) : height(h), width(w), values(static_cast<std::size_t>(h) * w, 0) {}

  uint8_t& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  uint8_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }

  int fixation_count() const;
};

}  // namespace salref
