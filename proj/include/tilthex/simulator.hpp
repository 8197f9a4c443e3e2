#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tilthex/actuation.hpp"
#include "tilthex/compensator.hpp"
#include "tilthex/controller.hpp"
#include "tilthex/gp.hpp"
#include "tilthex/rigid_body.hpp"

namespace tilthex::sim {

enum class TrajectoryKind { PitchSweep, Figure8, Step, Hover };

struct Excitation {
  int axis = 0;          // 0 = x, 1 = y, 2 = z
  double amplitude = 0.0;  // rad
  double frequency = 0.0;  // Hz
};

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::PitchSweep;
  double amplitude = M_PI / 3.0;     // rad for attitude kinds, m for figure8
  double duration = 10.0;            // s
  double max_angular_accel = 1.0;    // rad/s^2, reference design bound
  std::vector<Excitation> excitation;

  std::string kind_name() const;
};

/// Reference sample at time t. Out-of-range t is clamped with a warning;
/// attitude rates come from the analytic path where cheap and from central
/// differences of the attitude profile otherwise.
controller::Reference generate_reference(const TrajectorySpec& spec, double t);

/// One control-tick record. Column order of the CSV schema follows the
/// field order here.
struct EpisodeRow {
  double t = 0.0;
  rigid_body::State state;
  Vec3 ref_position{Vec3::Zero()};
  Eigen::Vector4d ref_attitude{1, 0, 0, 0};  // (w, x, y, z)
  Vec3 ref_omega{Vec3::Zero()};
  Vec6 w_des{Vec6::Zero()};
  Vec6 delta_w{Vec6::Zero()};
  Vec6 w_cmd{Vec6::Zero()};
  actuation::ActuatorCommand u_cmd;
  bool saturated = false;
  Vec6 w_realized{Vec6::Zero()};
  Vec3 m_measured{Vec3::Zero()};
  Vec3 e_p{Vec3::Zero()};
  Vec3 e_R{Vec3::Zero()};
  double beta = 0.0;
  double sigma = 0.0;
  double cost = 0.0;
  int iterations = 0;
};

struct EpisodeLog {
  std::vector<EpisodeRow> rows;
  bool unstable = false;
  double tick_dt = kControlDt;
  std::string trajectory;    // spec name, for report compatibility checks
  std::string config_hash;
  std::uint64_t seed = 0;
  bool compensation = false;
};

/// Everything an episode needs besides the trajectory and the seed.
struct EpisodeSetup {
  actuation::VehicleGeometry geometry;
  rigid_body::InertialParams inertial;
  actuation::MismatchParams mismatch;
  controller::ControllerGains gains;
  compensator::CompensatorConfig comp_cfg;
  bool compensation = false;
  const gp::GpModel* model = nullptr;
  double gravity = kGravity;
  double measurement_noise_std = 0.02;  // N*m on measured torque
  bool gyroscopic_torque = true;
  Vec3 initial_attitude_offset{Vec3::Zero()};  // axis-angle, for step tests
  std::string config_hash;
};

/// Fixed-step closed loop: controller + compensator + allocation at 100 Hz,
/// plant at 1 kHz with the realized wrench held over the tick. Terminates
/// early (flagged unstable) if the state diverges. Deterministic per seed.
EpisodeLog run_episode(const TrajectorySpec& spec, const EpisodeSetup& setup,
                       std::uint64_t seed);

/// Runs a nominal-controller episode (compensation must be off) and turns
/// the log into (W_cmd, measured minus commanded wrench) training pairs.
/// Torque targets use the noisy measurement, force targets the simulation
/// truth. Throws std::runtime_error if the episode goes unstable.
gp::TrainingSet collect_training_data(const TrajectorySpec& spec,
                                      const EpisodeSetup& setup,
                                      std::uint64_t seed);

/// Concatenates rows of episodes sharing a trajectory (metrics pooling).
EpisodeLog merge_logs(const std::vector<EpisodeLog>& logs);

}  // namespace tilthex::sim
