#pragma once

#include "tilthex/rigid_body.hpp"
#include "tilthex/types.hpp"

namespace tilthex::controller {

/// Reference trajectory sample. Attitude is the rotation R^ED of the
/// reference body frame D; angular rate/acceleration are expressed in D.
struct Reference {
  Vec3 p_des{Vec3::Zero()};
  Vec3 v_des{Vec3::Zero()};
  Vec3 a_des{Vec3::Zero()};
  Mat3 attitude{Mat3::Identity()};
  Vec3 omega_des{Vec3::Zero()};
  Vec3 omega_dot_des{Vec3::Zero()};
};

struct ControllerGains {
  double zeta_p = 0.707;
  double omega_n_p = 3.5;
  Vec3 zeta_a{1.3, 1.3, 0.74};
  Vec3 omega_n_a{3.5, 3.5, 3.5};
  double attitude_integral_gain = 0.3;
  double integral_limit = 1.0;  // N*m per axis
};

/// Accumulated attitude integral action in N*m, clamped per component.
struct IntegralState {
  Vec3 value{Vec3::Zero()};
};

/// e_R = 1/2 (R^DB - R^BD)^vee.
Vec3 attitude_error(const Mat3& r_db);

struct DesiredWrenchResult {
  Wrench wrench;  // body frame
  IntegralState integral;
  Vec3 e_p;
  Vec3 e_R;
  Vec3 e_omega;
};

/// Nominal controller: imposes second-order error dynamics on position and
/// attitude and converts the commanded accelerations into a body wrench
/// through the mass/inertia model. dt advances the attitude integral term.
DesiredWrenchResult desired_wrench(const rigid_body::State& state,
                                   const Reference& ref,
                                   const ControllerGains& gains,
                                   const rigid_body::InertialParams& params,
                                   double dt, const IntegralState& integral,
                                   double gravity = kGravity,
                                   bool gyroscopic_torque = true);

}  // namespace tilthex::controller
