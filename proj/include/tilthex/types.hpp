#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tilthex {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

constexpr double kGravity = 9.81;      // m/s^2, z-up inertial frame
constexpr double kPlantDt = 1e-3;      // plant integration step
constexpr double kControlDt = 1e-2;    // 100 Hz control tick

enum class Frame { Body, Inertial };

/// Body force + torque pair. The frame tag travels with the value so a
/// wrench expressed in E is never silently consumed as a body wrench.
struct Wrench {
  Vec3 force{Vec3::Zero()};
  Vec3 torque{Vec3::Zero()};
  Frame frame{Frame::Body};

  Vec6 as_vector() const {
    Vec6 w;
    w << force, torque;
    return w;
  }

  static Wrench from_vector(const Vec6& w, Frame frame) {
    return Wrench{w.head<3>(), w.tail<3>(), frame};
  }

  bool finite() const { return force.allFinite() && torque.allFinite(); }
};

inline void require_body_frame(const Wrench& w, const char* where) {
  if (w.frame != Frame::Body) {
    throw std::invalid_argument(std::string(where) + ": wrench must be in the body frame");
  }
}

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

inline Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

}  // namespace tilthex
