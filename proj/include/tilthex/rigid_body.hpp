#pragma once

#include "tilthex/types.hpp"

namespace tilthex::rigid_body {

/// Vehicle state: position/velocity in the inertial frame E, attitude as the
/// unit quaternion encoding R^EB, angular velocity in the body frame B.
struct State {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  Quat attitude{1.0, 0.0, 0.0, 0.0};
  Vec3 angular_velocity{Vec3::Zero()};

  bool finite() const {
    return position.allFinite() && velocity.allFinite() &&
           attitude.coeffs().allFinite() && angular_velocity.allFinite();
  }
};

struct StateDerivative {
  Vec3 position_dot{Vec3::Zero()};
  Vec3 velocity_dot{Vec3::Zero()};
  Eigen::Vector4d attitude_dot{Eigen::Vector4d::Zero()};  // (w, x, y, z)
  Vec3 angular_velocity_dot{Vec3::Zero()};
};

struct InertialParams {
  double mass{4.0};
  Mat3 inertia{ring_inertia(4.0, 0.4)};

  // Ring-of-point-masses model at the arm radius: Ixx = Iyy = m r^2 / 2,
  // Izz = m r^2.
  static Mat3 ring_inertia(double mass, double radius) {
    Mat3 inertia = Mat3::Zero();
    inertia(0, 0) = 0.5 * mass * radius * radius;
    inertia(1, 1) = 0.5 * mass * radius * radius;
    inertia(2, 2) = mass * radius * radius;
    return inertia;
  }
};

/// Throws std::invalid_argument unless mass > 0 and the inertia matrix is
/// symmetric (within 1e-12) and positive-definite.
void validate(const InertialParams& params);

/// Options for the rotational dynamics. Eq-of-motion purists can drop the
/// gyroscopic cross term to get the literal simplified model; the default
/// keeps it.
struct DynamicsOptions {
  bool gyroscopic_torque = true;
};

/// Continuous-time derivative of the 6-DOF rigid body under a body-frame
/// wrench: vdot^E = R^EB F^B / m + g * e_down, omegadot = I^-1 (M - w x I w).
StateDerivative derivative(const State& state, const Wrench& wrench_body,
                           const InertialParams& params, double gravity,
                           const DynamicsOptions& opts = {});

/// One classical RK4 step with the wrench held constant; the attitude
/// quaternion is renormalized afterwards. Requires 0 < dt <= 0.01 s.
State step(const State& state, const Wrench& wrench_body,
           const InertialParams& params, double dt,
           double gravity = kGravity, const DynamicsOptions& opts = {});

}  // namespace tilthex::rigid_body
