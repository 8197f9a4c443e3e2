#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "tilthex/random.hpp"
#include "tilthex/types.hpp"

namespace tilthex::actuation {

/// 18 actuator setpoints: twelve propeller thrusts (coaxial pair (2i, 2i+1)
/// sits on arm i) and six arm tilt angles.
struct ActuatorCommand {
  Eigen::Matrix<double, 12, 1> thrusts{Eigen::Matrix<double, 12, 1>::Zero()};  // N
  Vec6 tilt_angles{Vec6::Zero()};                                              // rad
};

struct VehicleGeometry {
  double arm_length = 0.4;        // m
  double thrust_max = 8.0;        // N per propeller
  double drag_coefficient = 0.016;  // m, torque-per-thrust, signed by spin dir

  // Hexagonal arm layout: azimuth of arm i measured from body x.
  static double arm_azimuth(int arm) { return arm * (M_PI / 3.0); }
};

/// Parameters of the synthetic actuation error eta(u) applied by the
/// simulated plant on top of the ideal forward model. The "ideal" preset is
/// the default-constructed struct (eta identically zero).
struct MismatchParams {
  double interference_gain = 0.0;            // c1, neighbor-tilt thrust loss
  double tilt_loss_gain = 0.0;               // c2, own-tilt thrust loss
  Vec3 torque_bias{Vec3::Zero()};            // N*m, constant offset
  Vec6 thrust_scale{Vec6::Ones()};           // per-arm multiplier
  double servo_tau = 0.0;                    // s, first-order lag; 0 disables
  double noise_std = 0.0;                    // N*m, torque noise

  static MismatchParams ideal() { return {}; }
  /// Tuned so nominal per-axis torque errors on the pitch trajectory land in
  /// a realistic-vehicle neighborhood. Per-arm thrust scales are drawn in
  /// [1 - scale_spread, 1 + scale_spread] from the seed and then frozen.
  static MismatchParams voliro_like(std::uint64_t seed,
                                    double scale_spread = 0.10);
};

struct ServoState {
  Vec6 tilt_angles{Vec6::Zero()};
};

struct AllocationResult {
  ActuatorCommand command;
  bool saturated = false;
};

/// Ideal actuation map h(u): per-arm pair thrust T_i = f_2i + f_2i+1 acts
/// along sin(a_i) t_i + cos(a_i) z where t_i is the horizontal tangent to
/// the arm, plus per-rotor drag torques (coaxial pairs cancel when the pair
/// split is equal).
Wrench forward_model(const ActuatorCommand& u, const VehicleGeometry& geom);

/// Pseudo-inverse allocation n(W): minimum-norm solve of the linear map
/// from the twelve per-arm (vertical, lateral) force components to the
/// wrench, followed by T/alpha recovery, equal pair split and saturation.
/// alpha_prev provides the tilt-angle tie-break for arms with T_i = 0.
AllocationResult allocate(const Wrench& w_cmd, const VehicleGeometry& geom,
                          const Vec6* alpha_prev = nullptr);

/// The 6x12 map used by allocate; exposed for oracle-style verification.
Eigen::Matrix<double, 6, 12> allocation_matrix(const VehicleGeometry& geom);

/// Realized wrench of the simulated true plant h*(u) = h(u) + eta(u):
/// per-arm thrust perturbations, constant torque bias, optional first-order
/// servo lag (needs dt when servo_tau > 0) and optional torque noise (rng
/// may be null to disable).
Wrench true_plant(const ActuatorCommand& u_cmd, const VehicleGeometry& geom,
                  const MismatchParams& mis, ServoState& servo, double dt,
                  Rng* rng = nullptr);

}  // namespace tilthex::actuation
