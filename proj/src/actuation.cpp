#include "tilthex/actuation.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace tilthex::actuation {

MismatchParams MismatchParams::voliro_like(std::uint64_t seed, double scale_spread) {
  MismatchParams mis;
  mis.interference_gain = 0.05;
  mis.tilt_loss_gain = 0.08;
  mis.torque_bias = Vec3(0.28, -0.18, 0.45);
  Rng rng(mix_seed(seed, 0x7115));
  for (int i = 0; i < 6; ++i) {
    mis.thrust_scale(i) = rng.uniform(1.0 - scale_spread, 1.0 + scale_spread);
  }
  mis.servo_tau = 0.0;
  mis.noise_std = 0.02;
  return mis;
}

Wrench forward_model(const ActuatorCommand& u, const VehicleGeometry& geom) {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  for (int arm = 0; arm < 6; ++arm) {
    const double psi = VehicleGeometry::arm_azimuth(arm);
    const Vec3 tangent(-std::sin(psi), std::cos(psi), 0.0);
    const Vec3 radial(std::cos(psi), std::sin(psi), 0.0);
    const Vec3 position = geom.arm_length * radial;
    const double alpha = u.tilt_angles(arm);
    const Vec3 axis = std::sin(alpha) * tangent + std::cos(alpha) * Vec3::UnitZ();

    const double pair_thrust = u.thrusts(2 * arm) + u.thrusts(2 * arm + 1);
    force += pair_thrust * axis;
    torque += position.cross(pair_thrust * axis);
    // Counter-rotating pair: even index spins positive about its axis.
    torque += geom.drag_coefficient *
              (u.thrusts(2 * arm) - u.thrusts(2 * arm + 1)) * axis;
  }
  return Wrench{force, torque, Frame::Body};
}

Eigen::Matrix<double, 6, 12> allocation_matrix(const VehicleGeometry& geom) {
  // Column 2i scales the vertical component x_v = T cos(alpha) of arm i,
  // column 2i+1 the lateral component x_l = T sin(alpha).
  Eigen::Matrix<double, 6, 12> a = Eigen::Matrix<double, 6, 12>::Zero();
  const double arm = geom.arm_length;
  for (int i = 0; i < 6; ++i) {
    const double psi = VehicleGeometry::arm_azimuth(i);
    a(2, 2 * i) = 1.0;
    a(3, 2 * i) = arm * std::sin(psi);
    a(4, 2 * i) = -arm * std::cos(psi);
    a(0, 2 * i + 1) = -std::sin(psi);
    a(1, 2 * i + 1) = std::cos(psi);
    a(5, 2 * i + 1) = arm;
  }
  return a;
}

AllocationResult allocate(const Wrench& w_cmd, const VehicleGeometry& geom,
                          const Vec6* alpha_prev) {
  require_body_frame(w_cmd, "actuation::allocate");

  const Eigen::Matrix<double, 6, 12> a = allocation_matrix(geom);
  // A has full row rank, so the Moore-Penrose minimum-norm solution is
  // A^T (A A^T)^-1 W.
  const Mat6 gram = a * a.transpose();
  const Eigen::Matrix<double, 12, 1> x =
      a.transpose() * gram.ldlt().solve(w_cmd.as_vector());

  AllocationResult out;
  for (int i = 0; i < 6; ++i) {
    const double vertical = x(2 * i);
    const double lateral = x(2 * i + 1);
    const double pair_thrust = std::hypot(vertical, lateral);
    double alpha;
    if (pair_thrust > 1e-12) {
      alpha = std::atan2(lateral, vertical);
    } else {
      alpha = alpha_prev != nullptr ? (*alpha_prev)(i) : 0.0;
    }
    double per_prop = 0.5 * pair_thrust;
    if (per_prop > geom.thrust_max) {
      per_prop = geom.thrust_max;
      out.saturated = true;
    }
    out.command.thrusts(2 * i) = per_prop;
    out.command.thrusts(2 * i + 1) = per_prop;
    out.command.tilt_angles(i) = alpha;
  }
  return out;
}

Wrench true_plant(const ActuatorCommand& u_cmd, const VehicleGeometry& geom,
                  const MismatchParams& mis, ServoState& servo, double dt,
                  Rng* rng) {
  ActuatorCommand u = u_cmd;
  if (mis.servo_tau > 0.0) {
    const double gain = std::min(dt / mis.servo_tau, 1.0);
    servo.tilt_angles += gain * (u_cmd.tilt_angles - servo.tilt_angles);
    u.tilt_angles = servo.tilt_angles;
  } else {
    servo.tilt_angles = u_cmd.tilt_angles;
  }

  for (int arm = 0; arm < 6; ++arm) {
    const int prev = (arm + 5) % 6;
    const int next = (arm + 1) % 6;
    const double neighbor_tilt =
        0.5 * (std::abs(std::sin(u.tilt_angles(prev))) +
               std::abs(std::sin(u.tilt_angles(next))));
    const double own = std::sin(u.tilt_angles(arm));
    const double scale = mis.thrust_scale(arm) *
                         (1.0 - mis.tilt_loss_gain * own * own) *
                         (1.0 - mis.interference_gain * neighbor_tilt);
    u.thrusts(2 * arm) *= scale;
    u.thrusts(2 * arm + 1) *= scale;
  }

  Wrench w = forward_model(u, geom);
  w.torque += mis.torque_bias;
  if (mis.noise_std > 0.0 && rng != nullptr) {
    w.torque += mis.noise_std * rng->normal3();
  }
  return w;
}

}  // namespace tilthex::actuation
