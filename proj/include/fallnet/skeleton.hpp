#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fallnet/error.hpp"
#include "fallnet/tensor.hpp"

namespace fallnet {

// Kinect v2 / NTU RGB+D joint order.
enum Joint : std::size_t {
  kBaseSpine = 0,
  kMidSpine,
  kNeck,
  kHead,
  kLeftShoulder,
  kLeftElbow,
  kLeftWrist,
  kLeftHand,
  kRightShoulder,
  kRightElbow,
  kRightWrist,
  kRightHand,
  kLeftHip,
  kLeftKnee,
  kLeftAnkle,
  kLeftFoot,
  kRightHip,
  kRightKnee,
  kRightAnkle,
  kRightFoot,
  kSpineShoulder,
  kLeftHandTip,
  kLeftThumb,
  kRightHandTip,
  kRightThumb,
};

inline constexpr std::size_t kNumJoints = 25;
inline constexpr std::size_t kDefaultFrames = 300;
// NTU action A043, "falling down".
inline constexpr int kNtuFallAction = 43;

inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "base_spine",  "mid_spine",   "neck",         "head",
    "l_shoulder",  "l_elbow",     "l_wrist",      "l_hand",
    "r_shoulder",  "r_elbow",     "r_wrist",      "r_hand",
    "l_hip",       "l_knee",      "l_ankle",      "l_foot",
    "r_hip",       "r_knee",      "r_ankle",      "r_foot",
    "spine_shoulder", "l_hand_tip", "l_thumb",    "r_hand_tip",
    "r_thumb"};

struct Joint3D {
  double x = 0.0, y = 0.0, z = 0.0;
  friend bool operator==(const Joint3D&, const Joint3D&) = default;
};

struct Joint2D {
  double u = 0.0, v = 0.0;
  friend bool operator==(const Joint2D&, const Joint2D&) = default;
};

// One frame. joints2d is either empty or the same length as joints3d.
// Parsed frames carry all 25 joints; select_joints produces subsets.
struct FramePose {
  std::vector<Joint3D> joints3d;
  std::vector<Joint2D> joints2d;

  bool has_2d() const { return !joints2d.empty(); }
  friend bool operator==(const FramePose&, const FramePose&) = default;
};

struct SkeletonSequence {
  std::vector<FramePose> frames;
  int action_label = 0;
  int camera_angle = 0;  // degrees, one of -45, 0, +45
  int subject_id = 0;
  std::string name;

  std::size_t joint_count() const {
    return frames.empty() ? 0 : frames.front().joints3d.size();
  }
  bool is_fall(int fall_action = kNtuFallAction) const {
    return action_label == fall_action;
  }
  friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;
};

inline bool valid_camera_angle(int angle) {
  return angle == -45 || angle == 0 || angle == 45;
}

enum class JointSetName { full25, mid16, core8, custom };

inline std::string_view to_string(JointSetName n) {
  switch (n) {
    case JointSetName::full25: return "full25";
    case JointSetName::mid16: return "mid16";
    case JointSetName::core8: return "core8";
    case JointSetName::custom: return "custom";
  }
  return "custom";
}

// A sorted subset of the 25-joint skeleton.
class JointSet {
 public:
  static JointSet full25() {
    std::vector<std::size_t> all(kNumJoints);
    for (std::size_t i = 0; i < kNumJoints; ++i) all[i] = i;
    return JointSet(JointSetName::full25, std::move(all));
  }

  // Drops hands, hand tips, thumbs, feet and the mid spine.
  static JointSet mid16() {
    return JointSet(JointSetName::mid16,
                    {kBaseSpine, kNeck, kHead, kLeftShoulder, kLeftElbow,
                     kLeftWrist, kRightShoulder, kRightElbow, kRightWrist,
                     kLeftHip, kLeftKnee, kLeftAnkle, kRightHip, kRightKnee,
                     kRightAnkle, kSpineShoulder});
  }

  static JointSet core8() {
    return JointSet(JointSetName::core8,
                    {kBaseSpine, kNeck, kHead, kLeftShoulder, kRightShoulder,
                     kLeftHip, kRightHip, kSpineShoulder});
  }

  static JointSet custom(std::vector<std::size_t> indices) {
    return JointSet(JointSetName::custom, std::move(indices));
  }

  static JointSet by_name(std::string_view name) {
    if (name == "full25" || name == "25") return full25();
    if (name == "mid16" || name == "16") return mid16();
    if (name == "core8" || name == "8") return core8();
    fail(ErrorKind::config, "unknown joint set '" + std::string(name) +
                                "' (expected full25, mid16 or core8)");
  }

  JointSetName name() const { return name_; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool contains(std::size_t joint) const {
    return std::binary_search(indices_.begin(), indices_.end(), joint);
  }

 private:
  JointSet(JointSetName name, std::vector<std::size_t> indices)
      : name_(name), indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
      fail(ErrorKind::config, "joint set indices must be unique");
    }
    if (!indices_.empty() && indices_.back() >= kNumJoints) {
      fail(ErrorKind::config, "joint index " + std::to_string(indices_.back()) +
                                  " outside the 25-joint skeleton");
    }
    const std::size_t expected = name == JointSetName::full25  ? 25
                                 : name == JointSetName::mid16 ? 16
                                 : name == JointSetName::core8 ? 8
                                                               : indices_.size();
    if (indices_.size() != expected || indices_.empty()) {
      fail(ErrorKind::config, "joint set " + std::string(to_string(name)) +
                                  " has " + std::to_string(indices_.size()) +
                                  " joints");
    }
  }

  JointSetName name_;
  std::vector<std::size_t> indices_;
};

// A sequence packed for the fall network: data is (3J, T) with row
// joint * 3 + axis, columns are frames.
struct FixedSequence {
  Tensor<float> data;
  int label = 0;  // 1 = fall

  std::size_t joints() const { return data.dim(0) / 3; }
  std::size_t frames() const { return data.dim(1); }
  friend bool operator==(const FixedSequence&, const FixedSequence&) = default;
};

}  // namespace fallnet
