#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "fallnet/binary_io.hpp"
#include "fallnet/skeleton.hpp"

// Binary container of FixedSequence records:
//   "FTCN"  u16 version  u16 J  u16 T  u32 count
//   count x (u8 label, 3*J*T f32 in (3J, T) row-major order)
// Little-endian throughout.
namespace fallnet {

inline constexpr std::uint16_t kCacheVersion = 1;

struct SequenceCache {
  std::size_t joints = 0;
  std::size_t frames = 0;
  std::vector<FixedSequence> records;

  std::size_t fall_count() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.label == 1;
    return n;
  }
};

inline void write_cache(std::ostream& os, const SequenceCache& cache) {
  constexpr auto u16max = std::numeric_limits<std::uint16_t>::max();
  if (cache.joints > u16max || cache.frames > u16max) {
    fail(ErrorKind::invalid_input, "cache dimensions exceed u16");
  }
  binary::write_magic(os, "FTCN");
  binary::write_le<std::uint16_t>(os, kCacheVersion);
  binary::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(cache.joints));
  binary::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(cache.frames));
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(cache.records.size()));
  for (const auto& r : cache.records) {
    if (r.data.shape() != Shape{3 * cache.joints, cache.frames}) {
      fail(ErrorKind::shape, "cache record " + shape_string(r.data.shape()) +
                                 " does not match (3J, T) = " +
                                 shape_string({3 * cache.joints, cache.frames}));
    }
    binary::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(r.label));
    for (float v : r.data.values()) binary::write_f32(os, v);
  }
}

inline SequenceCache read_cache(std::istream& is) {
  binary::expect_magic(is, "FTCN");
  const auto version = binary::read_le<std::uint16_t>(is, "cache version");
  if (version != kCacheVersion) {
    fail(ErrorKind::format, "unsupported cache version " + std::to_string(version));
  }
  SequenceCache cache;
  cache.joints = binary::read_le<std::uint16_t>(is, "J");
  cache.frames = binary::read_le<std::uint16_t>(is, "T");
  const auto count = binary::read_le<std::uint32_t>(is, "record count");
  cache.records.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    FixedSequence r{Tensor<float>({3 * cache.joints, cache.frames}), 0};
    r.label = binary::read_le<std::uint8_t>(is, "label");
    if (r.label > 1) fail(ErrorKind::format, "record label must be 0 or 1");
    for (auto& v : r.data.values()) v = binary::read_f32(is, "record data");
    cache.records.push_back(std::move(r));
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    fail(ErrorKind::format, "trailing bytes after the last cache record");
  }
  return cache;
}

inline void save_cache(const std::string& path, const SequenceCache& cache) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open " + path + " for writing");
  write_cache(os, cache);
  if (!os) fail(ErrorKind::io, "failed writing " + path);
}

inline SequenceCache load_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open cache " + path);
  return read_cache(is);
}

}  // namespace fallnet
