#include "salref/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include "salref/binio.hpp"

namespace salref {

namespace {
constexpr char kMagic[4] = {'S', 'A', 'L', 'D'};
constexpr uint32_t kVersion = 1;
}  // namespace

Dataset subset(const Dataset& d, const std::vector<int>& indices) {
  Dataset out;
  out.domain_tag = d.domain_tag;
  out.samples.reserve(indices.size());
  for (int i : indices) out.samples.push_back(d.samples[static_cast<std::size_t>(i)]);
  return out;
}

void save_dataset(const std::string& path, const Dataset& d) {
  if (d.empty()) throw std::invalid_argument("save_dataset: dataset is empty");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error(path + ": cannot open for writing");
  const int c = d.channels(), h = d.height(), w = d.width();
  os.write(kMagic, 4);
  binio::write_u32(os, kVersion);
  binio::write_u32(os, static_cast<uint32_t>(d.size()));
  binio::write_u32(os, static_cast<uint32_t>(c));
  binio::write_u32(os, static_cast<uint32_t>(h));
  binio::write_u32(os, static_cast<uint32_t>(w));
  for (const Sample& s : d.samples) {
    binio::write_f32_array(os, s.features.data(), s.features.size());
    binio::write_f32_array(os, s.gt_saliency.data(), s.gt_saliency.size());
    os.write(reinterpret_cast<const char*>(s.fixations.values.data()),
             static_cast<std::streamsize>(s.fixations.values.size()));
  }
  if (!os) throw std::runtime_error(path + ": write failed");
}

Dataset load_dataset(const std::string& path, DomainTag tag) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error(path + ": cannot open");
  binio::Reader r{is, path};

  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error(path + ": bad magic");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error(path + ": unsupported format version " + std::to_string(version));
  const uint32_t count = r.u32();
  const int c = static_cast<int>(r.u32());
  const int h = static_cast<int>(r.u32());
  const int w = static_cast<int>(r.u32());
  if (count == 0 || c <= 0 || h <= 0 || w <= 0)
    throw std::runtime_error(path + ": bad header dimensions");

  Dataset out;
  out.domain_tag = tag;
  out.samples.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    Sample s;
    s.features = Grid({c, h, w});
    r.f32_array(s.features.data(), s.features.size());
    s.gt_saliency = Grid({h, w});
    r.f32_array(s.gt_saliency.data(), s.gt_saliency.size());
    s.fixations = FixationMap(h, w);
    r.read(reinterpret_cast<char*>(s.fixations.values.data()), s.fixations.values.size());
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace salref
