#pragma once

#include <cstdint>
#include <string>

#include "tilthex/gp.hpp"
#include "tilthex/simulator.hpp"

namespace tilthex::io {

/// Episode log CSV: '#'-prefixed metadata lines (trajectory, config hash,
/// seed, compensation, unstable, tick_dt), one header row, then one row per
/// control tick with doubles printed as %.17g. Column order is fixed and
/// documented in the README.
void write_episode_csv(const sim::EpisodeLog& log, const std::string& path);
sim::EpisodeLog read_episode_csv(const std::string& path);

void save_training_set(const gp::TrainingSet& set, const std::string& vehicle_hash,
                       std::uint64_t seed, const std::string& path);
gp::TrainingSet load_training_set(const std::string& path,
                                  std::string* vehicle_hash = nullptr,
                                  std::uint64_t* seed = nullptr);

/// Self-describing JSON model file: shared inputs, per-axis targets and
/// hyperparameters, seed and provenance. Loading reconstructs each axis,
/// which re-runs (and thereby verifies) the Cholesky factorization.
void save_model(const gp::GpModel& model, const std::string& path);
gp::GpModel load_model(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace tilthex::io
