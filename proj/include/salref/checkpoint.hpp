#pragma once

#include <string>

#include "salref/model.hpp"

namespace salref {

// SALC checkpoint format, all integers little-endian:
//   magic "SALC", format version u32 (currently 1),
//   layer count u32, then per layer a length-prefixed record
//     (u32 byte length; u8 kind=0 conv2d, u32 kernel, u32 in_ch, u32 out_ch,
//      u8 activation),
//   head_boundary u32,
//   all parameters as f32 in flatten order.
// Round-trips are bit-exact.

void save_checkpoint(const std::string& path, const ModelState& model);
ModelState load_checkpoint(const std::string& path);

}  // namespace salref
