#include "salref/grid.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace salref {

namespace {
std::size_t checked_size(const std::vector<int>& shape) {
  if (shape.empty() || shape.size() > 3)
    throw std::invalid_argument("Grid: shape must have 1 to 3 dimensions");
  std::size_t n = 1;
  for (int e : shape) {
    if (e <= 0) throw std::invalid_argument("Grid: extents must be positive");
    n *= static_cast<std::size_t>(e);
  }
  return n;
}
}  // namespace

Grid::Grid(std::vector<int> shape, float fill)
    : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}

Grid::Grid(std::vector<int> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_size(shape_) != data_.size())
    throw std::invalid_argument("Grid: data length does not match shape");
}

bool Grid::all_finite() const {
  for (float v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

float Grid::max_value() const {
  float m = 0.0f;
  bool first = true;
  for (float v : data_) {
    if (first || v > m) m = v;
    first = false;
  }
  return data_.empty() ? 0.0f : m;
}

int FixationMap::fixation_count() const {
  int n = 0;
  for (uint8_t v : values) n += (v != 0);
  return n;
}

}  // namespace salref
