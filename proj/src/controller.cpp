#include "tilthex/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace tilthex::controller {

Vec3 attitude_error(const Mat3& r_db) {
  if ((r_db * r_db.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("controller::attitude_error: R_DB not orthonormal");
  }
  return vee(0.5 * (r_db - r_db.transpose()));
}

DesiredWrenchResult desired_wrench(const rigid_body::State& state,
                                   const Reference& ref,
                                   const ControllerGains& gains,
                                   const rigid_body::InertialParams& params,
                                   double dt, const IntegralState& integral,
                                   double gravity, bool gyroscopic_torque) {
  if (!state.finite()) {
    throw std::invalid_argument("controller::desired_wrench: non-finite state");
  }
  const Mat3 r_eb = state.attitude.toRotationMatrix();
  const Mat3 r_ed = ref.attitude;

  // Translational loop: command the acceleration that imposes
  // e_p'' = -2 zeta_p w_p e_p' - w_p^2 e_p, then rotate into B. The frame
  // rotation uses the current attitude.
  const Vec3 e_p = state.position - ref.p_des;
  const Vec3 e_v = state.velocity - ref.v_des;
  const Vec3 acc_cmd = ref.a_des -
                       2.0 * gains.zeta_p * gains.omega_n_p * e_v -
                       gains.omega_n_p * gains.omega_n_p * e_p;
  const Vec3 force_body =
      r_eb.transpose() * (params.mass * (acc_cmd + Vec3(0.0, 0.0, gravity)));

  // Rotational loop on SO(3).
  const Mat3 r_db = r_ed.transpose() * r_eb;
  const Vec3 e_R = attitude_error(r_db);
  const Mat3 r_bd = r_db.transpose();
  const Vec3 omega_d_body = r_bd * ref.omega_des;
  const Vec3 e_omega = state.angular_velocity - omega_d_body;

  Vec3 omega_dot_cmd;
  for (int i = 0; i < 3; ++i) {
    omega_dot_cmd(i) = -2.0 * gains.zeta_a(i) * gains.omega_n_a(i) * e_omega(i) -
                       gains.omega_n_a(i) * gains.omega_n_a(i) * e_R(i);
  }
  // Feedforward of the reference rotation so that perfect wrench tracking
  // reproduces the imposed error dynamics exactly.
  omega_dot_cmd += r_bd * ref.omega_dot_des -
                   state.angular_velocity.cross(omega_d_body);

  DesiredWrenchResult out;
  out.integral.value = integral.value + gains.attitude_integral_gain * e_R * dt;
  for (int i = 0; i < 3; ++i) {
    out.integral.value(i) = std::clamp(out.integral.value(i),
                                       -gains.integral_limit,
                                       gains.integral_limit);
  }

  Vec3 torque = params.inertia * omega_dot_cmd - out.integral.value;
  if (gyroscopic_torque) {
    torque += state.angular_velocity.cross(params.inertia * state.angular_velocity);
  }

  out.wrench = Wrench{force_body, torque, Frame::Body};
  out.e_p = e_p;
  out.e_R = e_R;
  out.e_omega = e_omega;
  return out;
}

}  // namespace tilthex::controller
