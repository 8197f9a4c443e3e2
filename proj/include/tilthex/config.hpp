#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tilthex/simulator.hpp"

namespace tilthex::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full experiment configuration. Mirrors the module configs section by
/// section; every key has a default and can come from the config file or a
/// --section.key=value override.
struct ExperimentConfig {
  // [vehicle]
  actuation::VehicleGeometry geometry;
  rigid_body::InertialParams inertial;
  double gravity = kGravity;
  bool gyroscopic = true;

  // [mismatch]
  std::string mismatch_preset = "voliro-like";  // or "ideal"
  // Optional per-key overrides applied after the preset; empty = keep preset.
  std::map<std::string, double> mismatch_overrides;

  // [controller]
  controller::ControllerGains gains;

  // [gp]
  int subsample_k = 100;
  int fit_restarts = 5;
  std::string gp_axes = "torque";  // "torque" or "all"

  // [compensator]
  compensator::CompensatorConfig comp;

  // [train] / [eval]
  sim::TrajectorySpec train_spec;
  sim::TrajectorySpec eval_spec;

  // [sim]
  double measurement_noise_std = 0.02;

  // [run]
  std::uint64_t seed = 1;
  std::string output_dir = "runs/default";
  int repeats = 10;

  ExperimentConfig();

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig defaults() { return ExperimentConfig{}; }

  /// Applies one "section.key=value" override; throws ConfigError on
  /// unknown keys or malformed values.
  void apply_override(const std::string& assignment);

  /// Deterministic canonical rendering of every resolved key (the config
  /// snapshot format). Hashes are FNV-1a over subsets of these lines.
  std::string canonical() const;

  /// Hash over the plant definition ([vehicle] + [mismatch]); artifacts
  /// must agree on this before they can be compared.
  std::string vehicle_hash() const;
  std::string full_hash() const;

  actuation::MismatchParams mismatch_params() const;
  double mismatch_scale_spread() const;
  std::vector<int> gp_axis_indices() const;
  sim::EpisodeSetup episode_setup(bool compensation,
                                  const gp::GpModel* model = nullptr) const;
};

std::string fnv1a_hex(const std::string& data);

}  // namespace tilthex::harness
