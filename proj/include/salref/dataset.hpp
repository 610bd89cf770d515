#pragma once

#include <string>
#include <vector>

#include "salref/grid.hpp"

namespace salref {

struct Sample {
  Grid features;          // C x H x W
  SaliencyMap gt_saliency;  // H x W in [0,1]
  FixationMap fixations;  // H x W binary
};

enum class DomainTag : uint8_t { source = 0, target = 1 };

struct Dataset {
  std::vector<Sample> samples;
  DomainTag domain_tag = DomainTag::source;

  bool empty() const { return samples.empty(); }
  int size() const { return static_cast<int>(samples.size()); }
  int channels() const { return samples.front().features.extent(0); }
  int height() const { return samples.front().features.extent(1); }
  int width() const { return samples.front().features.extent(2); }
};

Dataset subset(const Dataset& d, const std::vector<int>& indices);

// SALD dataset format, all integers little-endian:
//   magic "SALD", version u32 (currently 1), count u32, C u32, H u32, W u32;
//   per sample: features (C*H*W f32), gt saliency (H*W f32),
//   fixations (H*W u8).
void save_dataset(const std::string& path, const Dataset& d);
Dataset load_dataset(const std::string& path, DomainTag tag);

}  // namespace salref
