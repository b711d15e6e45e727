#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "fallnet/error.hpp"
#include "fallnet/skeleton.hpp"

// Pose canonicalization: root centering, Frobenius scaling and the two-bone
// rotation that puts the hip->spine bone on +z and the shoulder line on +x.
// All of it runs in double precision.
namespace fallnet {

using Pose2D = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Pose3D = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Joint roles used by normalization, as row indices into the pose matrix.
struct SkeletonIndices {
  std::size_t root = kBaseSpine;
  std::size_t hip = kBaseSpine;
  std::size_t spine = kSpineShoulder;
  std::size_t left_shoulder = kLeftShoulder;
  std::size_t right_shoulder = kRightShoulder;
};

// The same joint roles looked up inside a joint subset.
inline SkeletonIndices indices_within(const JointSet& set, const SkeletonIndices& full = {}) {
  auto find = [&](std::size_t joint) {
    const auto& idx = set.indices();
    auto it = std::lower_bound(idx.begin(), idx.end(), joint);
    if (it == idx.end() || *it != joint) {
      fail(ErrorKind::config, "joint set lacks " + std::string(kJointNames[joint]) +
                                  ", needed for normalization");
    }
    return static_cast<std::size_t>(it - idx.begin());
  };
  return {find(full.root), find(full.hip), find(full.spine), find(full.left_shoulder),
          find(full.right_shoulder)};
}

struct NormalizationConfig {
  SkeletonIndices joints;
  // Rotate every frame independently; otherwise the first frame's rotation
  // is reused for the whole sequence.
  bool per_frame_rotation = true;
  // Shoulder line mapped to +x as (right - left); false uses (left - right).
  bool right_minus_left = true;
};

class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}
  explicit Rotation(const Eigen::Matrix3d& m) : m_(m) {}

  const Eigen::Matrix3d& matrix() const { return m_; }

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }
  Rotation operator*(const Rotation& other) const { return Rotation(m_ * other.m_); }

  // Rotates every row of a pose.
  Pose3D apply(const Pose3D& pose) const { return pose * m_.transpose(); }

  double orthogonality_error() const {
    return (m_.transpose() * m_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  }
  double determinant() const { return m_.determinant(); }

 private:
  Eigen::Matrix3d m_;
};

template <typename Derived>
void check_root(const Eigen::MatrixBase<Derived>& pose, std::size_t root) {
  if (root >= static_cast<std::size_t>(pose.rows())) {
    fail(ErrorKind::invalid_input, "root index " + std::to_string(root) +
                                       " outside a " + std::to_string(pose.rows()) +
                                       "-joint pose");
  }
}

// Translates every joint by -pose[root].
template <typename Derived>
typename Derived::PlainObject center_to_root(const Eigen::MatrixBase<Derived>& pose,
                                             std::size_t root) {
  check_root(pose, root);
  typename Derived::PlainObject out = pose;
  out.rowwise() -= pose.row(static_cast<Eigen::Index>(root));
  return out;
}

template <typename PoseT>
struct ScaledPose {
  PoseT pose;
  double norm;
};

template <typename Derived>
ScaledPose<typename Derived::PlainObject> frobenius_scale(
    const Eigen::MatrixBase<Derived>& pose) {
  const double norm = pose.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    fail(ErrorKind::degenerate, "cannot scale a pose with Frobenius norm " +
                                    std::to_string(norm));
  }
  return {pose / norm, norm};
}

// Rotation taking unit(spine - hip) to +z, then spinning about z so the
// shoulder line projects onto +x.
inline Rotation align_rotation(const Pose3D& pose, std::size_t hip, std::size_t spine,
                               std::size_t left_shoulder, std::size_t right_shoulder,
                               bool right_minus_left = true) {
  for (std::size_t j : {hip, spine, left_shoulder, right_shoulder}) check_root(pose, j);
  const auto row = [&](std::size_t j) -> Eigen::Vector3d {
    return pose.row(static_cast<Eigen::Index>(j)).transpose();
  };

  const Eigen::Vector3d bone = row(spine) - row(hip);
  const double bone_len = bone.norm();
  if (!(bone_len > 1e-12)) {
    fail(ErrorKind::degenerate, "hip-to-spine bone has zero length");
  }
  const Eigen::Vector3d v = bone / bone_len;
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d axis = v.cross(z);
  const double axis_len = axis.norm();

  Eigen::Matrix3d r1;
  if (axis_len > 1e-12) {
    const double angle = std::atan2(axis_len, v.dot(z));
    r1 = Eigen::AngleAxisd(angle, axis / axis_len).toRotationMatrix();
  } else if (v.dot(z) > 0.0) {
    r1.setIdentity();
  } else {
    // Antiparallel: half turn about the x axis.
    r1 = Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitX()).toRotationMatrix();
  }

  const Eigen::Vector3d shoulders = right_minus_left
                                        ? row(right_shoulder) - row(left_shoulder)
                                        : row(left_shoulder) - row(right_shoulder);
  const Eigen::Vector3d w = r1 * shoulders;
  const double planar = std::hypot(w.x(), w.y());
  if (!(planar > 1e-9 * std::max(1.0, w.norm()))) {
    fail(ErrorKind::degenerate,
         "shoulder line is parallel to the spine; rotation about z is undetermined");
  }
  const Eigen::Matrix3d r2 =
      Eigen::AngleAxisd(-std::atan2(w.y(), w.x()), Eigen::Vector3d::UnitZ())
          .toRotationMatrix();
  return Rotation(r2 * r1);
}

inline Rotation align_rotation(const Pose3D& pose, const SkeletonIndices& idx,
                               bool right_minus_left = true) {
  return align_rotation(pose, idx.hip, idx.spine, idx.left_shoulder,
                        idx.right_shoulder, right_minus_left);
}

// center -> scale -> rotate.
inline Pose3D normalize_3d(const Pose3D& pose, const SkeletonIndices& idx = {},
                           bool right_minus_left = true) {
  const Pose3D centered = center_to_root(pose, idx.root);
  const auto scaled = frobenius_scale(centered);
  return align_rotation(scaled.pose, idx, right_minus_left).apply(scaled.pose);
}

// center -> scale, the lifting network's input convention.
inline Pose2D normalize_2d(const Pose2D& pose, std::size_t root = kBaseSpine) {
  return frobenius_scale(center_to_root(pose, root)).pose;
}

inline Pose3D to_pose3d(const FramePose& frame) {
  Pose3D p(static_cast<Eigen::Index>(frame.joints3d.size()), 3);
  for (std::size_t j = 0; j < frame.joints3d.size(); ++j) {
    const auto& q = frame.joints3d[j];
    p.row(static_cast<Eigen::Index>(j)) << q.x, q.y, q.z;
  }
  return p;
}

inline Pose2D to_pose2d(const FramePose& frame) {
  if (!frame.has_2d()) fail(ErrorKind::invalid_input, "frame carries no 2D joints");
  Pose2D p(static_cast<Eigen::Index>(frame.joints2d.size()), 2);
  for (std::size_t j = 0; j < frame.joints2d.size(); ++j)
    p.row(static_cast<Eigen::Index>(j)) << frame.joints2d[j].u, frame.joints2d[j].v;
  return p;
}

inline void assign_pose3d(FramePose& frame, const Pose3D& pose) {
  frame.joints3d.resize(static_cast<std::size_t>(pose.rows()));
  for (Eigen::Index j = 0; j < pose.rows(); ++j)
    frame.joints3d[static_cast<std::size_t>(j)] = {pose(j, 0), pose(j, 1), pose(j, 2)};
}

// Normalizes every frame's 3D joints; 2D joints are dropped.
inline SkeletonSequence normalize_sequence(const SkeletonSequence& seq,
                                           const NormalizationConfig& cfg = {}) {
  SkeletonSequence out = seq;
  Rotation shared;
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const Pose3D centered = center_to_root(to_pose3d(seq.frames[t]), cfg.joints.root);
    const Pose3D scaled = frobenius_scale(centered).pose;
    if (cfg.per_frame_rotation || t == 0) {
      shared = align_rotation(scaled, cfg.joints, cfg.right_minus_left);
    }
    out.frames[t].joints2d.clear();
    assign_pose3d(out.frames[t], shared.apply(scaled));
  }
  return out;
}

}  // namespace fallnet
