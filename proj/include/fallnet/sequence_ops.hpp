#pragma once

#include <utility>
#include <vector>

#include "fallnet/skeleton.hpp"

namespace fallnet {

// Packs a sequence into (3J, T), replicating the last frame into the
// trailing columns. Longer sequences are rejected rather than truncated.
inline FixedSequence pad_to_length(const SkeletonSequence& seq,
                                   std::size_t frames = kDefaultFrames,
                                   int fall_action = kNtuFallAction) {
  if (seq.frames.empty()) {
    fail(ErrorKind::invalid_input, "cannot pad an empty sequence" +
                                       (seq.name.empty() ? "" : " (" + seq.name + ")"));
  }
  if (seq.frames.size() > frames) {
    fail(ErrorKind::truncation, "sequence " + seq.name + " has " +
                                    std::to_string(seq.frames.size()) +
                                    " frames, more than the fixed length " +
                                    std::to_string(frames));
  }
  const std::size_t joints = seq.joint_count();
  FixedSequence out{Tensor<float>({3 * joints, frames}), seq.is_fall(fall_action) ? 1 : 0};
  for (std::size_t t = 0; t < frames; ++t) {
    const auto& frame = seq.frames[std::min(t, seq.frames.size() - 1)];
    if (frame.joints3d.size() != joints) {
      fail(ErrorKind::shape, "frame " + std::to_string(t) + " has " +
                                 std::to_string(frame.joints3d.size()) +
                                 " joints, expected " + std::to_string(joints));
    }
    for (std::size_t j = 0; j < joints; ++j) {
      const auto& p = frame.joints3d[j];
      out.data(3 * j + 0, t) = static_cast<float>(p.x);
      out.data(3 * j + 1, t) = static_cast<float>(p.y);
      out.data(3 * j + 2, t) = static_cast<float>(p.z);
    }
  }
  return out;
}

// Inverse view of pad_to_length: one frame per column, labels carried
// through as fall / not-fall action ids.
inline SkeletonSequence to_skeleton_sequence(const FixedSequence& fixed,
                                             int fall_action = kNtuFallAction) {
  SkeletonSequence seq;
  seq.action_label = fixed.label == 1 ? fall_action : 0;
  const std::size_t joints = fixed.joints();
  for (std::size_t t = 0; t < fixed.frames(); ++t) {
    FramePose f;
    for (std::size_t j = 0; j < joints; ++j)
      f.joints3d.push_back({fixed.data(3 * j, t), fixed.data(3 * j + 1, t),
                            fixed.data(3 * j + 2, t)});
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

inline SkeletonSequence select_joints(const SkeletonSequence& seq, const JointSet& set) {
  SkeletonSequence out = seq;
  for (auto& frame : out.frames) {
    const FramePose src = std::move(frame);
    frame = FramePose{};
    for (std::size_t j : set.indices()) {
      if (j >= src.joints3d.size()) {
        fail(ErrorKind::shape, "joint " + std::to_string(j) + " not present in a " +
                                   std::to_string(src.joints3d.size()) + "-joint frame");
      }
      frame.joints3d.push_back(src.joints3d[j]);
      if (src.has_2d()) frame.joints2d.push_back(src.joints2d[j]);
    }
  }
  return out;
}

inline FixedSequence select_joints(const FixedSequence& seq, const JointSet& set) {
  FixedSequence out{Tensor<float>({3 * set.size(), seq.frames()}), seq.label};
  std::size_t row = 0;
  for (std::size_t j : set.indices()) {
    if (j >= seq.joints()) {
      fail(ErrorKind::shape, "joint " + std::to_string(j) + " not present");
    }
    for (std::size_t axis = 0; axis < 3; ++axis, ++row)
      for (std::size_t t = 0; t < seq.frames(); ++t)
        out.data(row, t) = seq.data(3 * j + axis, t);
  }
  return out;
}

// Cross-view split: cameras 0 and +45 degrees train, -45 degrees tests.
template <typename Seq = SkeletonSequence>
std::pair<std::vector<Seq>, std::vector<Seq>> split_by_camera(const std::vector<Seq>& data) {
  std::pair<std::vector<Seq>, std::vector<Seq>> split;
  for (const auto& s : data) {
    if (!valid_camera_angle(s.camera_angle)) {
      fail(ErrorKind::invalid_input, "sequence " + s.name + " has camera angle " +
                                         std::to_string(s.camera_angle));
    }
    (s.camera_angle == -45 ? split.second : split.first).push_back(s);
  }
  return split;
}

}  // namespace fallnet
