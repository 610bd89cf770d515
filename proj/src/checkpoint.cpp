#include "salref/checkpoint.hpp"

#include <fstream>

#include "salref/binio.hpp"

namespace salref {

namespace {
constexpr char kMagic[4] = {'S', 'A', 'L', 'C'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kLayerRecordLen = 1 + 4 + 4 + 4 + 1;
}  // namespace

void save_checkpoint(const std::string& path, const ModelState& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot open for writing");
  os.write(kMagic, 4);
  binio::write_u32(os, kVersion);
  binio::write_u32(os, static_cast<uint32_t>(model.layers.size()));
  for (const auto& l : model.layers) {
    binio::write_u32(os, kLayerRecordLen);
    binio::write_u8(os, 0);  // conv2d
    binio::write_u32(os, static_cast<uint32_t>(l.kernel));
    binio::write_u32(os, static_cast<uint32_t>(l.in_channels));
    binio::write_u32(os, static_cast<uint32_t>(l.out_channels));
    binio::write_u8(os, static_cast<uint8_t>(l.activation));
  }
  binio::write_u32(os, static_cast<uint32_t>(model.head_boundary));
  const auto flat = model.flatten_params();
  binio::write_f32_array(os, flat.data(), flat.size());
  if (!os) throw std::runtime_error(path + ": write failed");
}

ModelState load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error(path + ": cannot open");
  binio::Reader r{is, path};

  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error(path + ": bad magic");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error(path + ": unsupported format version " + std::to_string(version));

  const uint32_t n_layers = r.u32();
  if (n_layers == 0 || n_layers > 1024) throw std::runtime_error(path + ": bad layer count");
  std::vector<LayerSpec> layers;
  for (uint32_t i = 0; i < n_layers; ++i) {
    const uint32_t len = r.u32();
    if (len != kLayerRecordLen)
      throw std::runtime_error(path + ": unexpected layer record length " + std::to_string(len));
    const uint8_t kind = r.u8();
    if (kind != 0) throw std::runtime_error(path + ": unknown layer kind");
    LayerSpec l;
    l.kernel = static_cast<int>(r.u32());
    l.in_channels = static_cast<int>(r.u32());
    l.out_channels = static_cast<int>(r.u32());
    const uint8_t act = r.u8();
    if (act > 1) throw std::runtime_error(path + ": unknown activation tag");
    l.activation = static_cast<Activation>(act);
    if (l.kernel <= 0 || l.in_channels <= 0 || l.out_channels <= 0)
      throw std::runtime_error(path + ": bad layer dimensions");
    layers.push_back(l);
  }
  const uint32_t head_boundary = r.u32();
  if (head_boundary > n_layers) throw std::runtime_error(path + ": head_boundary out of range");

  // Reconstruct through make_model to reuse the chain/shape validation, then
  // overwrite the random init with the stored parameters.
  Rng scratch(0);
  ModelState model = make_model(layers, static_cast<int>(n_layers - head_boundary), scratch);
  std::vector<float> flat(model.param_count());
  r.f32_array(flat.data(), flat.size());
  model.load_params(flat);
  return model;
}

}  // namespace salref
