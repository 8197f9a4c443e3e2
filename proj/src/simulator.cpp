#include "tilthex/simulator.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "tilthex/random.hpp"

namespace tilthex::sim {

namespace {

constexpr double kFigure8Period = 20.0;   // s per lap
constexpr double kFigure8Tilt = 63.0 * M_PI / 180.0;
constexpr double kStepTime = 1.0;         // s, attitude step instant
constexpr double kOmegaLimit = 50.0;      // rad/s divergence cutoff

// Quintic smoothstep: C^2, zero first/second derivative at both ends.
double smoothstep5(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

// Ramp 0 -> 1 -> 0 envelope with quintic shoulders, used to start and stop
// excitation and the figure-8 tilt at rest.
double envelope(double t, double duration) {
  const double ramp = std::min(1.0, duration / 4.0);
  if (t < ramp) return smoothstep5(t / ramp);
  if (t > duration - ramp) return smoothstep5((duration - t) / ramp);
  return 1.0;
}

Vec3 excitation_angles(const TrajectorySpec& spec, double t) {
  Vec3 angles = Vec3::Zero();
  const double env = envelope(t, spec.duration);
  for (const auto& e : spec.excitation) {
    if (e.axis < 0 || e.axis > 2) {
      throw std::invalid_argument("TrajectorySpec: excitation axis out of range");
    }
    angles(e.axis) += env * e.amplitude * std::sin(2.0 * M_PI * e.frequency * t);
  }
  return angles;
}

double pitch_profile(const TrajectorySpec& spec, double t) {
  const double half = 0.5 * spec.duration;
  const double u = t <= half ? t / half : (spec.duration - t) / half;
  return spec.amplitude * smoothstep5(u);
}

struct Figure8Point {
  Vec3 p;
  Vec3 v;
  Vec3 a;
};

// Lemniscate of Bernoulli in rational form, half-span = spec.amplitude.
Figure8Point figure8_path(double a, double t) {
  const double w = 2.0 * M_PI / kFigure8Period;
  const double phi = w * t;
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double den = 1.0 + s * s;

  Figure8Point out;
  out.p = Vec3(a * c / den, a * s * c / den, 0.0);

  // Analytic derivatives via the chain rule on phi.
  const double dden = 2.0 * s * c;
  const double dx = a * (-s * den - c * dden) / (den * den);
  const double dy = a * (std::cos(2.0 * phi) * den - s * c * dden) / (den * den);
  out.v = w * Vec3(dx, dy, 0.0);

  // Second derivative by central difference of the analytic velocity; the
  // reference acceleration only feeds the translational feedforward.
  const double h = 1e-5;
  auto vel = [&](double tt) {
    const double p2 = w * tt;
    const double s2 = std::sin(p2), c2 = std::cos(p2);
    const double d2 = 1.0 + s2 * s2;
    const double dd2 = 2.0 * s2 * c2;
    return w * Vec3(a * (-s2 * d2 - c2 * dd2) / (d2 * d2),
                    a * (std::cos(2.0 * p2) * d2 - s2 * c2 * dd2) / (d2 * d2),
                    0.0);
  };
  out.a = (vel(t + h) - vel(t - h)) / (2.0 * h);
  return out;
}

Mat3 rotation_from_axis_angles(const Vec3& angles) {
  const double norm = angles.norm();
  if (norm < 1e-14) return Mat3::Identity();
  return Eigen::AngleAxisd(norm, angles / norm).toRotationMatrix();
}

// Attitude profile R^ED(t), continuous in t for the smooth kinds.
Mat3 attitude_profile(const TrajectorySpec& spec, double t) {
  const double tc = std::clamp(t, 0.0, spec.duration);
  switch (spec.kind) {
    case TrajectoryKind::Hover:
      return rotation_from_axis_angles(excitation_angles(spec, tc));
    case TrajectoryKind::Step: {
      Mat3 base = tc < kStepTime
                      ? Mat3::Identity()
                      : Eigen::AngleAxisd(spec.amplitude, Vec3::UnitX())
                            .toRotationMatrix();
      return base * rotation_from_axis_angles(excitation_angles(spec, tc));
    }
    case TrajectoryKind::PitchSweep: {
      const Mat3 base =
          Eigen::AngleAxisd(pitch_profile(spec, tc), Vec3::UnitY())
              .toRotationMatrix();
      return base * rotation_from_axis_angles(excitation_angles(spec, tc));
    }
    case TrajectoryKind::Figure8: {
      const auto path = figure8_path(spec.amplitude, tc);
      const Vec3 v_h(path.v.x(), path.v.y(), 0.0);
      Mat3 base = Mat3::Identity();
      if (v_h.norm() > 1e-9) {
        // Tip the body z axis toward the direction of travel.
        const Vec3 axis = Vec3::UnitZ().cross(v_h.normalized());
        const double tilt = kFigure8Tilt * envelope(tc, spec.duration);
        base = rotation_from_axis_angles(tilt * axis);
      }
      return base * rotation_from_axis_angles(excitation_angles(spec, tc));
    }
  }
  return Mat3::Identity();
}

Vec3 log_so3(const Mat3& r) {
  Quat q(r);
  q.normalize();
  Vec3 v(q.x(), q.y(), q.z());
  const double norm = v.norm();
  const double w = std::abs(q.w());
  const double sign = q.w() < 0.0 ? -1.0 : 1.0;
  if (norm < 1e-12) return 2.0 * sign * v;
  const double angle = 2.0 * std::atan2(norm, w);
  return sign * angle * v / norm;
}

// omega^D(t) and its derivative from central differences of the attitude
// profile: R^T Rdot = [omega^D]^.
void numeric_rates(const TrajectorySpec& spec, double t, Vec3* omega,
                   Vec3* omega_dot) {
  const double h = 1e-4;
  auto omega_at = [&](double tt) {
    const Mat3 r_minus = attitude_profile(spec, tt - h);
    const Mat3 r_plus = attitude_profile(spec, tt + h);
    return Vec3(log_so3(r_minus.transpose() * r_plus) / (2.0 * h));
  };
  *omega = omega_at(t);
  *omega_dot = (omega_at(t + h) - omega_at(t - h)) / (2.0 * h);
}

}  // namespace

std::string TrajectorySpec::kind_name() const {
  switch (kind) {
    case TrajectoryKind::PitchSweep: return "pitch_sweep";
    case TrajectoryKind::Figure8: return "figure8";
    case TrajectoryKind::Step: return "step";
    case TrajectoryKind::Hover: return "hover";
  }
  return "unknown";
}

controller::Reference generate_reference(const TrajectorySpec& spec, double t) {
  if (!(spec.duration > 0.0) || !(spec.max_angular_accel > 0.0)) {
    throw std::invalid_argument("TrajectorySpec: duration and accel bound must be positive");
  }
  if (t < 0.0 || t > spec.duration) {
    std::cerr << "warning: reference time " << t << " outside [0, "
              << spec.duration << "], clamped\n";
    t = std::clamp(t, 0.0, spec.duration);
  }

  controller::Reference ref;
  ref.attitude = attitude_profile(spec, t);

  if (spec.kind == TrajectoryKind::Figure8) {
    const auto path = figure8_path(spec.amplitude, t);
    ref.p_des = path.p;
    ref.v_des = path.v;
    ref.a_des = path.a;
  }

  const bool discontinuous = spec.kind == TrajectoryKind::Step;
  const bool stationary =
      spec.kind == TrajectoryKind::Hover && spec.excitation.empty();
  if (!discontinuous && !stationary) {
    numeric_rates(spec, t, &ref.omega_des, &ref.omega_dot_des);
  }
  return ref;
}

EpisodeLog run_episode(const TrajectorySpec& spec, const EpisodeSetup& setup,
                       std::uint64_t seed) {
  if (setup.compensation && setup.model == nullptr) {
    throw std::invalid_argument("run_episode: compensation on but no model");
  }
  rigid_body::validate(setup.inertial);

  EpisodeLog log;
  log.trajectory = spec.kind_name();
  log.config_hash = setup.config_hash;
  log.seed = seed;
  log.compensation = setup.compensation;

  Rng rng(seed);
  const auto substeps = static_cast<int>(std::llround(kControlDt / kPlantDt));
  const auto n_ticks = static_cast<long>(std::llround(spec.duration / kControlDt));

  // Start on the reference.
  const auto ref0 = generate_reference(spec, 0.0);
  rigid_body::State state;
  state.position = ref0.p_des;
  state.velocity = ref0.v_des;
  Mat3 r0 = ref0.attitude;
  const double offset = setup.initial_attitude_offset.norm();
  if (offset > 0.0) {
    r0 = r0 * Eigen::AngleAxisd(offset, setup.initial_attitude_offset / offset)
                  .toRotationMatrix();
  }
  state.attitude = Quat(r0);
  state.angular_velocity = r0.transpose() * ref0.attitude * ref0.omega_des;

  controller::IntegralState integral;
  compensator::CompensatorState comp_state;
  actuation::ServoState servo;
  Vec6 alpha_prev = Vec6::Zero();
  const rigid_body::DynamicsOptions dyn{setup.gyroscopic_torque};

  log.rows.reserve(static_cast<std::size_t>(n_ticks));
  for (long tick = 0; tick < n_ticks; ++tick) {
    const double t = static_cast<double>(tick) * kControlDt;
    const auto ref = generate_reference(spec, t);
    const auto ctrl = controller::desired_wrench(
        state, ref, setup.gains, setup.inertial, kControlDt, integral,
        setup.gravity, setup.gyroscopic_torque);
    integral = ctrl.integral;

    EpisodeRow row;
    row.t = t;
    row.state = state;
    row.ref_position = ref.p_des;
    const Quat qref(ref.attitude);
    row.ref_attitude << qref.w(), qref.x(), qref.y(), qref.z();
    row.ref_omega = ref.omega_des;
    row.w_des = ctrl.wrench.as_vector();
    row.e_p = ctrl.e_p;
    row.e_R = ctrl.e_R;

    Vec6 delta = Vec6::Zero();
    if (setup.compensation) {
      const auto solved = compensator::solve_compensation(
          row.w_des, *setup.model, setup.comp_cfg, comp_state);
      comp_state.last_iterate = solved.delta;
      row.cost = solved.cost;
      row.iterations = solved.iterations;
      if (setup.comp_cfg.filter_enabled) {
        const auto filtered = compensator::uncertainty_filter(
            solved.delta, row.w_des, *setup.model, setup.comp_cfg, comp_state);
        delta = filtered.delta;
        row.beta = filtered.beta;
        row.sigma = filtered.sigma;
      } else {
        delta = solved.delta;
        comp_state.delta_prev = delta;
        row.sigma =
            setup.model->predict(row.w_des + solved.delta).std.maxCoeff();
      }
    }
    row.delta_w = delta;
    row.w_cmd = row.w_des + delta;

    const auto alloc = actuation::allocate(
        Wrench::from_vector(row.w_cmd, Frame::Body), setup.geometry, &alpha_prev);
    alpha_prev = alloc.command.tilt_angles;
    row.u_cmd = alloc.command;
    row.saturated = alloc.saturated;

    const Wrench realized =
        actuation::true_plant(alloc.command, setup.geometry, setup.mismatch,
                              servo, kControlDt, &rng);
    row.w_realized = realized.as_vector();
    row.m_measured = realized.torque;
    if (setup.measurement_noise_std > 0.0) {
      row.m_measured += setup.measurement_noise_std * rng.normal3();
    }
    log.rows.push_back(row);

    for (int s = 0; s < substeps; ++s) {
      state = rigid_body::step(state, realized, setup.inertial, kPlantDt,
                               setup.gravity, dyn);
    }
    if (!state.finite() || state.angular_velocity.norm() > kOmegaLimit) {
      log.unstable = true;
      break;
    }
  }
  return log;
}

gp::TrainingSet collect_training_data(const TrajectorySpec& spec,
                                      const EpisodeSetup& setup,
                                      std::uint64_t seed) {
  if (setup.compensation) {
    throw std::invalid_argument(
        "collect_training_data: training runs use the nominal controller only");
  }
  const EpisodeLog log = run_episode(spec, setup, seed);
  if (log.unstable) {
    throw std::runtime_error("collect_training_data: training episode went unstable");
  }

  gp::TrainingSet out;
  const auto n = static_cast<Eigen::Index>(log.rows.size());
  out.inputs.resize(n, 6);
  out.targets.resize(n, 6);
  out.times.reserve(log.rows.size());
  out.episode = spec.kind_name() + "/seed=" + std::to_string(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = log.rows[static_cast<std::size_t>(i)];
    out.inputs.row(i) = row.w_cmd.transpose();
    out.targets.row(i).head<3>() =
        (row.w_realized.head<3>() - row.w_cmd.head<3>()).transpose();
    out.targets.row(i).tail<3>() =
        (row.m_measured - row.w_cmd.tail<3>()).transpose();
    out.times.push_back(row.t);
  }
  return out;
}

EpisodeLog merge_logs(const std::vector<EpisodeLog>& logs) {
  if (logs.empty()) {
    throw std::invalid_argument("merge_logs: no logs");
  }
  EpisodeLog out = logs.front();
  for (std::size_t i = 1; i < logs.size(); ++i) {
    if (logs[i].trajectory != out.trajectory) {
      throw std::invalid_argument("merge_logs: mismatched trajectories");
    }
    out.rows.insert(out.rows.end(), logs[i].rows.begin(), logs[i].rows.end());
    out.unstable = out.unstable || logs[i].unstable;
  }
  return out;
}

}  // namespace tilthex::sim
