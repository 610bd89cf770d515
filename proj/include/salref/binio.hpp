#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace salref::binio {

// Little-endian primitives shared by the SALC / SALD file formats.

inline void write_u8(std::ostream& os, uint8_t v) { os.put(static_cast<char>(v)); }

inline void write_u32(std::ostream& os, uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
               static_cast<char>(v >> 24)};
  os.write(b, 4);
}

inline void write_f32(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(os, bits);
}

inline void write_f32_array(std::ostream& os, const float* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) write_f32(os, data[i]);
}

struct Reader {
  std::istream& is;
  std::string context;  // file path, for error messages
  std::size_t consumed = 0;

  void read(char* dst, std::size_t n) {
    is.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
      throw std::runtime_error(context + ": truncated file, expected " + std::to_string(n) +
                               " more bytes at offset " + std::to_string(consumed));
    consumed += n;
  }

  uint8_t u8() {
    char b;
    read(&b, 1);
    return static_cast<uint8_t>(b);
  }

  uint32_t u32() {
    char b[4];
    read(b, 4);
    return static_cast<uint32_t>(static_cast<uint8_t>(b[0])) |
           static_cast<uint32_t>(static_cast<uint8_t>(b[1])) << 8 |
           static_cast<uint32_t>(static_cast<uint8_t>(b[2])) << 16 |
           static_cast<uint32_t>(static_cast<uint8_t>(b[3])) << 24;
  }

  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  void f32_array(float* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = f32();
  }
};

}  // namespace salref::binio
