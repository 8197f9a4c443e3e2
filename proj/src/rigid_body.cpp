#include "tilthex/rigid_body.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace tilthex::rigid_body {

void validate(const InertialParams& params) {
  if (!(params.mass > 0.0) || !std::isfinite(params.mass)) {
    throw std::invalid_argument("InertialParams: mass must be positive and finite");
  }
  if (!params.inertia.allFinite()) {
    throw std::invalid_argument("InertialParams: inertia has non-finite entries");
  }
  if ((params.inertia - params.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("InertialParams: inertia must be symmetric");
  }
  Eigen::LLT<Mat3> llt(params.inertia);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("InertialParams: inertia must be positive-definite");
  }
}

namespace {

Eigen::Vector4d quat_derivative(const Eigen::Vector4d& q, const Vec3& omega) {
  // qdot = 1/2 q (x) (0, omega), omega in body frame
  const double w = q(0);
  const Vec3 v = q.tail<3>();
  Eigen::Vector4d qdot;
  qdot(0) = -0.5 * v.dot(omega);
  qdot.tail<3>() = 0.5 * (w * omega + v.cross(omega));
  return qdot;
}

StateDerivative eval(const Eigen::Matrix<double, 13, 1>& x, const Wrench& wrench,
                     const InertialParams& params, double gravity,
                     const DynamicsOptions& opts) {
  const Vec3 velocity = x.segment<3>(3);
  Eigen::Vector4d q = x.segment<4>(6);
  q.normalize();
  const Quat attitude(q(0), q(1), q(2), q(3));
  const Vec3 omega = x.segment<3>(10);

  StateDerivative d;
  d.position_dot = velocity;
  d.velocity_dot = attitude.toRotationMatrix() * wrench.force / params.mass +
                   Vec3(0.0, 0.0, -gravity);
  d.attitude_dot = quat_derivative(x.segment<4>(6), omega);
  Vec3 torque = wrench.torque;
  if (opts.gyroscopic_torque) {
    torque -= omega.cross(params.inertia * omega);
  }
  d.angular_velocity_dot = params.inertia.ldlt().solve(torque);
  return d;
}

Eigen::Matrix<double, 13, 1> pack(const State& s) {
  Eigen::Matrix<double, 13, 1> x;
  x.segment<3>(0) = s.position;
  x.segment<3>(3) = s.velocity;
  x(6) = s.attitude.w();
  x.segment<3>(7) = Vec3(s.attitude.x(), s.attitude.y(), s.attitude.z());
  x.segment<3>(10) = s.angular_velocity;
  return x;
}

Eigen::Matrix<double, 13, 1> pack(const StateDerivative& d) {
  Eigen::Matrix<double, 13, 1> x;
  x.segment<3>(0) = d.position_dot;
  x.segment<3>(3) = d.velocity_dot;
  x.segment<4>(6) = d.attitude_dot;
  x.segment<3>(10) = d.angular_velocity_dot;
  return x;
}

}  // namespace

StateDerivative derivative(const State& state, const Wrench& wrench_body,
                           const InertialParams& params, double gravity,
                           const DynamicsOptions& opts) {
  require_body_frame(wrench_body, "rigid_body::derivative");
  if (!state.finite() || !wrench_body.finite() || !std::isfinite(gravity)) {
    throw std::invalid_argument("rigid_body::derivative: non-finite input");
  }
  validate(params);
  return eval(pack(state), wrench_body, params, gravity, opts);
}

State step(const State& state, const Wrench& wrench_body,
           const InertialParams& params, double dt, double gravity,
           const DynamicsOptions& opts) {
  if (!(dt > 0.0) || dt > 0.01) {
    throw std::invalid_argument("rigid_body::step: dt must be in (0, 0.01] s");
  }
  require_body_frame(wrench_body, "rigid_body::step");
  if (!state.finite() || !wrench_body.finite() || !std::isfinite(gravity)) {
    throw std::invalid_argument("rigid_body::step: non-finite input");
  }
  validate(params);

  const Eigen::Matrix<double, 13, 1> x0 = pack(state);
  const auto k1 = pack(eval(x0, wrench_body, params, gravity, opts));
  const auto k2 = pack(eval(x0 + 0.5 * dt * k1, wrench_body, params, gravity, opts));
  const auto k3 = pack(eval(x0 + 0.5 * dt * k2, wrench_body, params, gravity, opts));
  const auto k4 = pack(eval(x0 + dt * k3, wrench_body, params, gravity, opts));
  const Eigen::Matrix<double, 13, 1> x1 =
      x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  State out;
  out.position = x1.segment<3>(0);
  out.velocity = x1.segment<3>(3);
  Quat q(x1(6), x1(7), x1(8), x1(9));
  q.normalize();
  out.attitude = q;
  out.angular_velocity = x1.segment<3>(10);
  return out;
}

}  // namespace tilthex::rigid_body
