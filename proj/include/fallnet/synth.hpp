#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "fallnet/error.hpp"
#include "fallnet/normalization.hpp"
#include "fallnet/skeleton.hpp"

// Procedural skeleton sequences standing in for NTU data at desk scale.
// Bodies live in a z-up world frame (meters); x points to the body's right
// and y forward in the rest pose.
namespace fallnet::synth {

inline constexpr std::array<int, kNumJoints> kParent = {
    -1, 0, 20, 2, 20, 4, 5, 6, 20, 8, 9, 10, 0, 12, 13, 14,
    0, 16, 17, 18, 1, 7, 7, 11, 11};

// Parents precede children.
inline constexpr std::array<std::size_t, kNumJoints> kFkOrder = {
    0, 1, 20, 2, 3, 4, 5, 6, 7, 21, 22, 8, 9, 10, 11, 23, 24,
    12, 13, 14, 15, 16, 17, 18, 19};

inline const std::array<Eigen::Vector3d, kNumJoints>& rest_positions() {
  static const std::array<Eigen::Vector3d, kNumJoints> rest = [] {
    std::array<Eigen::Vector3d, kNumJoints> p;
    p[kBaseSpine] = {0, 0, 1.00};
    p[kMidSpine] = {0, 0, 1.22};
    p[kSpineShoulder] = {0, 0, 1.45};
    p[kNeck] = {0, 0, 1.53};
    p[kHead] = {0, 0.02, 1.68};
    p[kLeftShoulder] = {-0.18, 0, 1.42};
    p[kLeftElbow] = {-0.20, 0, 1.14};
    p[kLeftWrist] = {-0.21, 0, 0.90};
    p[kLeftHand] = {-0.21, 0, 0.83};
    p[kLeftHandTip] = {-0.21, 0, 0.75};
    p[kLeftThumb] = {-0.19, 0.04, 0.85};
    p[kLeftHip] = {-0.10, 0, 0.95};
    p[kLeftKnee] = {-0.10, 0.01, 0.52};
    p[kLeftAnkle] = {-0.10, 0, 0.09};
    p[kLeftFoot] = {-0.10, 0.12, 0.03};
    const std::pair<std::size_t, std::size_t> mirror[] = {
        {kLeftShoulder, kRightShoulder}, {kLeftElbow, kRightElbow},
        {kLeftWrist, kRightWrist},       {kLeftHand, kRightHand},
        {kLeftHandTip, kRightHandTip},   {kLeftThumb, kRightThumb},
        {kLeftHip, kRightHip},           {kLeftKnee, kRightKnee},
        {kLeftAnkle, kRightAnkle},       {kLeftFoot, kRightFoot}};
    for (auto [l, r] : mirror) p[r] = {-p[l].x(), p[l].y(), p[l].z()};
    return p;
  }();
  return rest;
}

// Joint angles in radians. Positive flexion swings a limb forward (+y).
struct Articulation {
  double spine_flex = 0.0;  // torso leaning forward
  double hip_flex[2] = {0.0, 0.0};  // left, right
  double knee_flex[2] = {0.0, 0.0};
  double shoulder_flex[2] = {0.0, 0.0};
  double shoulder_abduct[2] = {0.0, 0.0};
  double elbow_flex[2] = {0.0, 0.0};
};

inline Eigen::Matrix3d rot_x(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
inline Eigen::Matrix3d rot_y(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
inline Eigen::Matrix3d rot_z(double a) {
  return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

// Forward kinematics: joint positions for an articulation, a global
// orientation about the base spine and a root position.
inline Pose3D forward_kinematics(const Articulation& a, const Eigen::Matrix3d& orientation,
                                 const Eigen::Vector3d& root, double body_scale = 1.0) {
  const auto& rest = rest_positions();
  std::array<Eigen::Matrix3d, kNumJoints> local;
  local.fill(Eigen::Matrix3d::Identity());
  local[kMidSpine] = rot_x(-a.spine_flex);
  const std::size_t hips[2] = {kLeftHip, kRightHip};
  const std::size_t knees[2] = {kLeftKnee, kRightKnee};
  const std::size_t shoulders[2] = {kLeftShoulder, kRightShoulder};
  const std::size_t elbows[2] = {kLeftElbow, kRightElbow};
  for (int s = 0; s < 2; ++s) {
    const double side = s == 0 ? 1.0 : -1.0;
    local[hips[s]] = rot_x(a.hip_flex[s]);
    local[knees[s]] = rot_x(-a.knee_flex[s]);
    local[shoulders[s]] = rot_x(a.shoulder_flex[s]) * rot_y(side * a.shoulder_abduct[s]);
    local[elbows[s]] = rot_x(a.elbow_flex[s]);
  }

  std::array<Eigen::Matrix3d, kNumJoints> world_rot;
  Pose3D out(static_cast<Eigen::Index>(kNumJoints), 3);
  for (std::size_t j : kFkOrder) {
    Eigen::Vector3d pos;
    if (kParent[j] < 0) {
      world_rot[j] = orientation * local[j];
      pos = root;
    } else {
      const auto p = static_cast<std::size_t>(kParent[j]);
      world_rot[j] = world_rot[p] * local[j];
      pos = out.row(static_cast<Eigen::Index>(p)).transpose() +
            world_rot[p] * ((rest[j] - rest[p]) * body_scale);
    }
    out.row(static_cast<Eigen::Index>(j)) = pos.transpose();
  }
  return out;
}

// Pinhole camera looking along world +y from `distance` meters in front of
// the origin at `height`; image v grows downward.
struct Camera {
  double fx = 1050.0, fy = 1050.0;
  double cx = 960.0, cy = 540.0;
  double height = 1.0;
  double distance = 5.0;

  // World point -> camera frame (x right, y down, z depth).
  Eigen::Vector3d to_camera(const Eigen::Vector3d& w) const {
    return {w.x(), -(w.z() - height), w.y() + distance};
  }

  Eigen::Vector2d project_camera(const Eigen::Vector3d& c) const {
    return {fx * c.x() / c.z() + cx, fy * c.y() / c.z() + cy};
  }

  Pose3D to_camera(const Pose3D& world) const {
    Pose3D out(world.rows(), 3);
    for (Eigen::Index j = 0; j < world.rows(); ++j)
      out.row(j) = to_camera(Eigen::Vector3d(world.row(j).transpose())).transpose();
    return out;
  }

  Pose2D project(const Pose3D& camera_frame) const {
    Pose2D out(camera_frame.rows(), 2);
    for (Eigen::Index j = 0; j < camera_frame.rows(); ++j)
      out.row(j) =
          project_camera(Eigen::Vector3d(camera_frame.row(j).transpose())).transpose();
    return out;
  }
};

struct LengthRange {
  std::size_t min = 60;
  std::size_t max = 300;
};

namespace detail {

inline double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

enum class Activity { idle, walk, bend, fall };

inline Articulation walk_cycle(double phase, double amplitude) {
  Articulation a;
  const double s = std::sin(phase);
  a.hip_flex[0] = 0.35 * amplitude * s;
  a.hip_flex[1] = -0.35 * amplitude * s;
  a.knee_flex[0] = 0.1 + 0.45 * amplitude * std::max(0.0, -s);
  a.knee_flex[1] = 0.1 + 0.45 * amplitude * std::max(0.0, s);
  a.shoulder_flex[0] = -0.3 * amplitude * s;
  a.shoulder_flex[1] = 0.3 * amplitude * s;
  a.shoulder_abduct[0] = a.shoulder_abduct[1] = 0.1;
  a.elbow_flex[0] = a.elbow_flex[1] = 0.25;
  return a;
}

inline Articulation blend(const Articulation& x, const Articulation& y, double w) {
  auto mix = [w](double p, double q) { return (1.0 - w) * p + w * q; };
  Articulation a;
  a.spine_flex = mix(x.spine_flex, y.spine_flex);
  for (int s = 0; s < 2; ++s) {
    a.hip_flex[s] = mix(x.hip_flex[s], y.hip_flex[s]);
    a.knee_flex[s] = mix(x.knee_flex[s], y.knee_flex[s]);
    a.shoulder_flex[s] = mix(x.shoulder_flex[s], y.shoulder_flex[s]);
    a.shoulder_abduct[s] = mix(x.shoulder_abduct[s], y.shoulder_abduct[s]);
    a.elbow_flex[s] = mix(x.elbow_flex[s], y.elbow_flex[s]);
  }
  return a;
}

}  // namespace detail

// Generates `count` labelled sequences. Exactly round(count * fall_fraction)
// of them are falls (action 43): a standing or walking lead-in, a topple
// over 12-40 frames with bending knees and reaching arms, then lying still.
// The rest idle, walk or bend down and recover.
inline std::vector<SkeletonSequence> generate(std::uint64_t seed, std::size_t count,
                                              double fall_fraction,
                                              LengthRange lengths = {},
                                              const Camera& camera = {}) {
  if (!(fall_fraction >= 0.0 && fall_fraction <= 1.0)) {
    fail(ErrorKind::invalid_input, "fall fraction must lie in [0, 1]");
  }
  if (lengths.min < 1 || lengths.min > lengths.max) {
    fail(ErrorKind::invalid_input, "invalid synthetic length range");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.005);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const auto falls = static_cast<std::size_t>(
      std::llround(static_cast<double>(count) * fall_fraction));
  std::vector<bool> is_fall(count, false);
  std::fill_n(is_fall.begin(), falls, true);
  std::shuffle(is_fall.begin(), is_fall.end(), rng);

  const int angles[3] = {-45, 0, 45};
  std::vector<SkeletonSequence> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    SkeletonSequence seq;
    const auto length = static_cast<std::size_t>(
        std::uniform_int_distribution<std::size_t>(lengths.min, lengths.max)(rng));
    seq.camera_angle = angles[std::uniform_int_distribution<int>(0, 2)(rng)];
    seq.subject_id = std::uniform_int_distribution<int>(1, 40)(rng);
    seq.name = "synth_" + std::to_string(n);

    detail::Activity activity = detail::Activity::fall;
    if (is_fall[n]) {
      seq.action_label = kNtuFallAction;
    } else {
      int action = std::uniform_int_distribution<int>(1, 59)(rng);
      if (action >= kNtuFallAction) ++action;
      seq.action_label = action;
      activity = static_cast<detail::Activity>(std::uniform_int_distribution<int>(0, 2)(rng));
    }

    const double scale = uniform(0.88, 1.12);
    const double yaw = uniform(-0.6, 0.6) + seq.camera_angle * M_PI / 180.0;
    const double speed = activity == detail::Activity::walk ? uniform(0.004, 0.01) : 0.0;
    const double gait_rate = uniform(0.12, 0.2);
    const double gait_amp = activity == detail::Activity::walk ? uniform(0.7, 1.1) : 0.08;
    const double phase0 = uniform(0.0, 2.0 * M_PI);
    // Fall timing and direction.
    const bool walking_lead = unit(rng) < 0.5;
    const double onset = uniform(0.1, 0.6) * static_cast<double>(length);
    const double duration = uniform(12.0, 40.0);
    const double fall_dir = uniform(-M_PI, M_PI);
    const double fall_angle = uniform(1.35, 1.57);
    // Bend timing.
    const double bend_mid = uniform(0.3, 0.7) * static_cast<double>(length);
    const double bend_width = uniform(20.0, 60.0);
    const double bend_depth = uniform(0.5, 1.1);

    Articulation lying;
    lying.spine_flex = uniform(-0.1, 0.3);
    for (int s = 0; s < 2; ++s) {
      lying.hip_flex[s] = uniform(0.2, 0.9);
      lying.knee_flex[s] = uniform(0.3, 1.2);
      lying.shoulder_flex[s] = uniform(1.2, 2.4);
      lying.shoulder_abduct[s] = uniform(0.3, 1.0);
      lying.elbow_flex[s] = uniform(0.1, 0.8);
    }

    const Eigen::Matrix3d facing = rot_z(yaw);
    const Eigen::Vector3d heading = facing * Eigen::Vector3d::UnitY();
    const Eigen::Vector3d tip_dir(std::sin(fall_dir), std::cos(fall_dir), 0.0);
    const Eigen::Vector3d tip_axis = Eigen::Vector3d::UnitZ().cross(tip_dir).normalized();
    Eigen::Vector3d root(uniform(-0.5, 0.5), uniform(-0.5, 0.5), 0.0);

    for (std::size_t t = 0; t < length; ++t) {
      const double ft = static_cast<double>(t);
      const double phase = phase0 + gait_rate * ft;
      Articulation a;
      Eigen::Matrix3d orientation = facing;
      switch (activity) {
        case detail::Activity::idle:
        case detail::Activity::walk:
          a = detail::walk_cycle(phase, gait_amp);
          root += heading * speed;
          break;
        case detail::Activity::bend: {
          const double w = std::exp(-0.5 * std::pow((ft - bend_mid) / bend_width, 2));
          Articulation crouch;
          crouch.spine_flex = bend_depth;
          for (int s = 0; s < 2; ++s) {
            crouch.hip_flex[s] = 0.4 * bend_depth;
            crouch.knee_flex[s] = 0.5 * bend_depth;
            crouch.shoulder_flex[s] = 0.6;
            crouch.elbow_flex[s] = 0.3;
          }
          a = detail::blend(detail::walk_cycle(phase, 0.08), crouch, w);
          break;
        }
        case detail::Activity::fall: {
          const double s = detail::smoothstep((ft - onset) / duration);
          const Articulation lead =
              detail::walk_cycle(phase, walking_lead ? 0.9 : 0.08);
          if (walking_lead && s == 0.0) root += heading * 0.02;
          a = detail::blend(lead, lying, s);
          orientation = Eigen::AngleAxisd(s * fall_angle, tip_axis).toRotationMatrix() * facing;
          break;
        }
      }
      a.spine_flex += 0.03 * std::sin(0.05 * ft + phase0);

      Pose3D pose = forward_kinematics(a, orientation, Eigen::Vector3d::Zero(), scale);
      const double ground = pose.col(2).minCoeff();
      pose.rowwise() += (root - Eigen::Vector3d(0, 0, ground - 0.02)).transpose();
      for (Eigen::Index j = 0; j < pose.rows(); ++j)
        for (int k = 0; k < 3; ++k) pose(j, k) += jitter(rng);

      FramePose frame;
      assign_pose3d(frame, pose);
      const Pose2D uv = camera.project(camera.to_camera(pose));
      for (Eigen::Index j = 0; j < uv.rows(); ++j)
        frame.joints2d.push_back({uv(j, 0), uv(j, 1)});
      seq.frames.push_back(std::move(frame));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace fallnet::synth
