#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fallnet/binary_io.hpp"
#include "fallnet/nn/parameter.hpp"
#include "fallnet/tensor.hpp"

// Checkpoint container:
//   "FTCK"  u16 version
//   u32 config length, config bytes (key=value text describing the model)
//   u32 entry count, then per entry: u16 name length, name, u8 rank, u32 dims
//   f32 blobs for every entry in manifest order
// All integers and floats little-endian.
namespace fallnet::nn {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::string config;
  std::vector<CheckpointEntry> entries;
};

template <typename T>
Checkpoint snapshot(const std::string& config, const std::vector<StateRef<T>>& state) {
  Checkpoint ck{config, {}};
  for (const auto& s : state) {
    ck.entries.push_back({s.name, s.value->shape(),
                          std::vector<float>(s.value->values().begin(),
                                             s.value->values().end())});
  }
  return ck;
}

inline void write_checkpoint(std::ostream& os, const Checkpoint& ck) {
  binary::write_magic(os, "FTCK");
  binary::write_le<std::uint16_t>(os, kCheckpointVersion);
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ck.config.size()));
  os.write(ck.config.data(), static_cast<std::streamsize>(ck.config.size()));
  binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(ck.entries.size()));
  for (const auto& e : ck.entries) {
    binary::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    binary::write_le<std::uint8_t>(os, static_cast<std::uint8_t>(e.shape.size()));
    for (auto d : e.shape) binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  }
  for (const auto& e : ck.entries)
    for (float v : e.values) binary::write_f32(os, v);
}

inline Checkpoint read_checkpoint(std::istream& is) {
  binary::expect_magic(is, "FTCK");
  const auto version = binary::read_le<std::uint16_t>(is, "checkpoint version");
  if (version != kCheckpointVersion) {
    fail(ErrorKind::format, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const auto cfg_len = binary::read_le<std::uint32_t>(is, "config length");
  ck.config.resize(cfg_len);
  if (!is.read(ck.config.data(), cfg_len)) fail(ErrorKind::format, "truncated checkpoint config");
  const auto count = binary::read_le<std::uint32_t>(is, "entry count");
  for (std::uint32_t k = 0; k < count; ++k) {
    CheckpointEntry e;
    const auto name_len = binary::read_le<std::uint16_t>(is, "entry name length");
    e.name.resize(name_len);
    if (!is.read(e.name.data(), name_len)) fail(ErrorKind::format, "truncated entry name");
    const auto rank = binary::read_le<std::uint8_t>(is, "entry rank");
    for (std::uint8_t r = 0; r < rank; ++r)
      e.shape.push_back(binary::read_le<std::uint32_t>(is, "entry dim"));
    ck.entries.push_back(std::move(e));
  }
  for (auto& e : ck.entries) {
    e.values.resize(shape_numel(e.shape));
    for (auto& v : e.values) v = binary::read_f32(is, "parameter blob");
  }
  return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open " + path + " for writing");
  write_checkpoint(os, ck);
  if (!os) fail(ErrorKind::io, "failed writing " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open checkpoint " + path);
  return read_checkpoint(is);
}

// Copies checkpoint values into live model state, checking names and shapes.
template <typename T>
void restore(const Checkpoint& ck, const std::vector<StateRef<T>>& state) {
  if (ck.entries.size() != state.size()) {
    fail(ErrorKind::shape, "checkpoint has " + std::to_string(ck.entries.size()) +
                               " tensors, model expects " + std::to_string(state.size()));
  }
  for (std::size_t k = 0; k < state.size(); ++k) {
    const auto& e = ck.entries[k];
    auto& dst = *state[k].value;
    if (e.name != state[k].name || e.shape != dst.shape()) {
      fail(ErrorKind::shape, "checkpoint tensor " + e.name + " " + shape_string(e.shape) +
                                 " does not match model tensor " + state[k].name + " " +
                                 shape_string(dst.shape()));
    }
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(e.values[i]);
  }
}

}  // namespace fallnet::nn
