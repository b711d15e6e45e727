#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fallnet/lifting_net.hpp"
#include "fallnet/synth.hpp"

namespace fallnet {

struct RawPosePair {
  Pose2D image;   // pixels
  Pose3D camera;  // camera frame, meters
};

// Random articulated bodies seen by a fixed pinhole camera.
inline std::vector<RawPosePair> synth_raw_pose_pairs(std::uint64_t seed, std::size_t count,
                                                     const synth::Camera& camera = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::vector<RawPosePair> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    synth::Articulation a;
    a.spine_flex = uniform(-0.3, 0.6);
    for (int s = 0; s < 2; ++s) {
      a.hip_flex[s] = uniform(-0.5, 1.2);
      a.knee_flex[s] = uniform(0.0, 1.5);
      a.shoulder_flex[s] = uniform(-0.5, 2.5);
      a.shoulder_abduct[s] = uniform(0.0, 1.5);
      a.elbow_flex[s] = uniform(0.0, 2.0);
    }
    const Eigen::Matrix3d orientation =
        synth::rot_z(uniform(-M_PI, M_PI)) * synth::rot_x(uniform(-0.2, 0.2));
    const Eigen::Vector3d root(uniform(-0.4, 0.4), uniform(-0.5, 0.5), uniform(0.9, 1.1));
    const Pose3D world = synth::forward_kinematics(a, orientation, root, uniform(0.9, 1.1));
    RawPosePair p;
    p.camera = camera.to_camera(world);
    p.image = camera.project(p.camera);
    out.push_back(std::move(p));
  }
  return out;
}

inline PosePair normalize_pair(const RawPosePair& raw, std::size_t root = kBaseSpine) {
  return {normalize_2d(raw.image, root),
          frobenius_scale(center_to_root(raw.camera, root)).pose};
}

// Normalized training pairs for the lifting network.
inline std::vector<PosePair> synth_pose_pairs(std::uint64_t seed, std::size_t count) {
  std::vector<PosePair> out;
  for (const auto& raw : synth_raw_pose_pairs(seed, count)) out.push_back(normalize_pair(raw));
  return out;
}

// Pairs from parsed frames that carry both 3D camera-space joints and 2D
// color-space joints, taking every `stride`-th frame.
inline std::vector<PosePair> pose_pairs_from_sequences(const std::vector<SkeletonSequence>& seqs,
                                                       std::size_t stride = 10) {
  std::vector<PosePair> out;
  for (const auto& s : seqs)
    for (std::size_t t = 0; t < s.frames.size(); t += std::max<std::size_t>(stride, 1)) {
      const auto& f = s.frames[t];
      if (!f.has_2d()) continue;
      out.push_back(normalize_pair({to_pose2d(f), to_pose3d(f)}));
    }
  return out;
}

}  // namespace fallnet
