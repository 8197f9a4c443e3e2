#pragma once

#include <string>

#include "tilthex/config.hpp"

namespace tilthex::harness {

// Exit codes shared by the CLI and the pipeline functions.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInstability = 3;
inline constexpr int kExitNumericalFailure = 4;

std::string training_set_path(const ExperimentConfig& cfg);
std::string model_path(const ExperimentConfig& cfg);
std::string log_path(const ExperimentConfig& cfg, bool compensation, int repeat);

/// collect: nominal-controller episode on the training trajectory,
/// k-medoids subsample, persisted training set.
void cmd_collect(const ExperimentConfig& cfg);

/// train: fit the per-axis GPs on the persisted training set, persist the
/// model with hyperparameters and fit diagnostics.
void cmd_train(const ExperimentConfig& cfg);

/// evaluate: repeated evaluation episodes with compensation off and on
/// (distinct noise seeds), persisted logs plus prediction/tracking reports.
/// Throws InstabilityError if any episode diverges.
void cmd_evaluate(const ExperimentConfig& cfg);

/// report: recompute both reports from the persisted logs and model.
void cmd_report(const ExperimentConfig& cfg);

void cmd_all(const ExperimentConfig& cfg);

/// Maps harness exceptions onto the documented exit codes.
int run_command(const std::string& command, const ExperimentConfig& cfg);

}  // namespace tilthex::harness
