#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fallnet/error.hpp"
#include "fallnet/skeleton.hpp"

// Reader and writer for the NTU RGB+D ".skeleton" text layout:
//
//   <frame count>
//   per frame:  <body count>
//     per body: <tracking id> <9 body state fields>
//               <joint count = 25>
//               25 x: x y z depthX depthY colorX colorY qw qx qy qz state
//
// Only x y z (camera space, meters) and colorX colorY (pixels) are kept.
namespace fallnet {

struct NtuParseResult {
  // One sequence per tracking id, in order of first appearance.
  std::vector<SkeletonSequence> bodies;
  bool multi_person = false;   // some frame holds more than one body
  bool missing_body = false;   // some frame holds no body, or zero frames
  bool missing_joint = false;  // some joint sits exactly at the origin

  bool excluded() const {
    return multi_person || missing_body || missing_joint || bodies.size() != 1;
  }
};

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  // Next non-empty line, split on whitespace.
  std::vector<std::string_view> next(const char* what) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      auto fields = split(line);
      if (!fields.empty()) return fields;
    }
    fail(ErrorKind::parse, "line " + std::to_string(line_no_ + 1) +
                               ": unexpected end of file, expected " + what);
  }

  std::size_t line_no() const { return line_no_; }

  bool at_end() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
      if (c == '\n') ++line_no_;
      ++pos_;
    }
    return true;
  }

 private:
  static std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

template <typename N>
N parse_number(std::string_view field, std::size_t line, const char* what) {
  N value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": invalid " + what +
                               " '" + std::string(field) + "'");
  }
  if constexpr (std::is_floating_point_v<N>) {
    if (!std::isfinite(value)) {
      fail(ErrorKind::parse, "line " + std::to_string(line) + ": non-finite " + what);
    }
  }
  return value;
}

inline void expect_fields(const std::vector<std::string_view>& f, std::size_t n,
                          std::size_t line, const char* what) {
  if (f.size() != n) {
    fail(ErrorKind::parse, "line " + std::to_string(line) + ": " + what +
                               " has " + std::to_string(f.size()) +
                               " fields, expected " + std::to_string(n));
  }
}

}  // namespace detail

inline NtuParseResult parse_ntu_skeleton(std::string_view text) {
  detail::LineReader reader(text);
  auto header = reader.next("frame count");
  detail::expect_fields(header, 1, reader.line_no(), "frame count line");
  const auto frame_count =
      detail::parse_number<long long>(header[0], reader.line_no(), "frame count");
  if (frame_count < 0) {
    fail(ErrorKind::parse, "line " + std::to_string(reader.line_no()) +
                               ": negative frame count");
  }

  NtuParseResult result;
  std::map<std::string, std::size_t, std::less<>> body_slot;
  if (frame_count == 0) result.missing_body = true;

  for (long long f = 0; f < frame_count; ++f) {
    auto bc = reader.next("body count");
    detail::expect_fields(bc, 1, reader.line_no(), "body count line");
    const auto bodies =
        detail::parse_number<long long>(bc[0], reader.line_no(), "body count");
    if (bodies < 0) {
      fail(ErrorKind::parse, "line " + std::to_string(reader.line_no()) +
                                 ": negative body count");
    }
    if (bodies == 0) result.missing_body = true;
    if (bodies > 1) result.multi_person = true;

    for (long long b = 0; b < bodies; ++b) {
      auto info = reader.next("body info");
      detail::expect_fields(info, 10, reader.line_no(), "body info line");
      const std::string id(info[0]);

      auto jc = reader.next("joint count");
      detail::expect_fields(jc, 1, reader.line_no(), "joint count line");
      const auto joints =
          detail::parse_number<long long>(jc[0], reader.line_no(), "joint count");
      if (joints != static_cast<long long>(kNumJoints)) {
        fail(ErrorKind::format, "line " + std::to_string(reader.line_no()) +
                                    ": joint count " + std::to_string(joints) +
                                    ", expected 25");
      }

      FramePose pose;
      pose.joints3d.reserve(kNumJoints);
      pose.joints2d.reserve(kNumJoints);
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        auto jf = reader.next("joint line");
        const auto ln = reader.line_no();
        detail::expect_fields(jf, 12, ln, "joint line");
        Joint3D p{detail::parse_number<double>(jf[0], ln, "x"),
                  detail::parse_number<double>(jf[1], ln, "y"),
                  detail::parse_number<double>(jf[2], ln, "z")};
        Joint2D c{detail::parse_number<double>(jf[5], ln, "colorX"),
                  detail::parse_number<double>(jf[6], ln, "colorY")};
        for (std::size_t k : {3u, 4u, 7u, 8u, 9u, 10u, 11u})
          detail::parse_number<double>(jf[k], ln, "joint field");
        if (p.x == 0.0 && p.y == 0.0 && p.z == 0.0) result.missing_joint = true;
        pose.joints3d.push_back(p);
        pose.joints2d.push_back(c);
      }

      auto [it, inserted] = body_slot.try_emplace(id, result.bodies.size());
      if (inserted) {
        result.bodies.emplace_back();
        result.bodies.back().name = id;
      }
      result.bodies[it->second].frames.push_back(std::move(pose));
    }
  }
  if (!reader.at_end()) {
    fail(ErrorKind::parse, "line " + std::to_string(reader.line_no() + 1) +
                               ": trailing data after the last frame");
  }
  return result;
}

// Metadata encoded in NTU file names: SsssCcccPpppRrrrAaaa.
struct NtuFileInfo {
  int setup = 0;
  int camera = 0;
  int subject = 0;
  int replication = 0;
  int action = 0;
};

// Camera 1 faces -45 degrees, camera 2 the front, camera 3 +45 degrees.
inline int ntu_camera_angle(int camera) {
  switch (camera) {
    case 1: return -45;
    case 2: return 0;
    case 3: return 45;
  }
  fail(ErrorKind::format, "camera id " + std::to_string(camera) + " outside 1..3");
}

inline int ntu_camera_id(int angle) {
  switch (angle) {
    case -45: return 1;
    case 0: return 2;
    case 45: return 3;
  }
  fail(ErrorKind::invalid_input, "camera angle " + std::to_string(angle) +
                                     " is not one of -45, 0, 45");
}

inline std::optional<NtuFileInfo> parse_ntu_filename(std::string_view name) {
  if (auto slash = name.find_last_of("/\\"); slash != std::string_view::npos)
    name = name.substr(slash + 1);
  if (name.size() < 20) return std::nullopt;
  NtuFileInfo info;
  const char tags[5] = {'S', 'C', 'P', 'R', 'A'};
  int* slots[5] = {&info.setup, &info.camera, &info.subject, &info.replication,
                   &info.action};
  for (std::size_t k = 0; k < 5; ++k) {
    const std::string_view part = name.substr(k * 4, 4);
    if (part[0] != tags[k]) return std::nullopt;
    auto [ptr, ec] = std::from_chars(part.data() + 1, part.data() + 4, *slots[k]);
    if (ec != std::errc{} || ptr != part.data() + 4) return std::nullopt;
  }
  return info;
}

inline std::string ntu_filename(const NtuFileInfo& info) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%03dC%03dP%03dR%03dA%03d.skeleton", info.setup,
                info.camera, info.subject, info.replication, info.action);
  return buf;
}

// Serializes a single-body sequence. Fields not carried by FramePose are
// written as zeros (orientation as the identity quaternion).
inline std::string write_ntu_skeleton(const SkeletonSequence& seq) {
  std::ostringstream os;
  os.precision(10);
  os << seq.frames.size() << '\n';
  for (const auto& frame : seq.frames) {
    if (frame.joints3d.size() != kNumJoints) {
      fail(ErrorKind::format, "only 25-joint frames can be written");
    }
    os << "1\n";
    os << "72057594037931101 0 1 1 1 1 0 0 0 2\n";
    os << kNumJoints << '\n';
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      const auto& p = frame.joints3d[j];
      const Joint2D c = frame.has_2d() ? frame.joints2d[j] : Joint2D{};
      os << p.x << ' ' << p.y << ' ' << p.z << ' ' << 0 << ' ' << 0 << ' ' << c.u
         << ' ' << c.v << " 1 0 0 0 2\n";
    }
  }
  return os.str();
}

// Parses a file on disk and fills labels from its NTU-style name.
inline NtuParseResult load_ntu_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  NtuParseResult r;
  try {
    r = parse_ntu_skeleton(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.filename().string() + ": " + e.what());
  }
  const auto info = parse_ntu_filename(path.filename().string());
  if (!info) {
    fail(ErrorKind::format, "file name " + path.filename().string() +
                                " does not follow SsssCcccPpppRrrrAaaa");
  }
  for (auto& body : r.bodies) {
    body.action_label = info->action;
    body.camera_angle = ntu_camera_angle(info->camera);
    body.subject_id = info->subject;
    body.name = path.stem().string();
  }
  return r;
}

}  // namespace fallnet
