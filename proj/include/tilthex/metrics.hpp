#pragma once

#include <array>
#include <string>

#include "tilthex/gp.hpp"
#include "tilthex/simulator.hpp"

namespace tilthex::metrics {

/// Per-torque-axis absolute prediction errors: |M_cmd - M_meas| for the
/// nominal model, |M_pred - M_meas| for the learned one, where
/// M_pred = mu_M(W_cmd) + M_cmd. Reductions are percentages of the mean;
/// positive means improvement.
struct PredictionReport {
  std::array<double, 3> nominal_mean{};
  std::array<double, 3> nominal_std{};
  std::array<double, 3> learned_mean{};
  std::array<double, 3> learned_std{};
  std::array<double, 3> reduction_pct{};
};

PredictionReport prediction_report(const sim::EpisodeLog& log,
                                   const gp::GpModel& model);

/// Per-axis |e_R| statistics for a compensated and a baseline episode.
/// Box range is the interquartile range (25th to 75th percentile).
struct TrackingReport {
  std::array<double, 3> off_median{}, off_iqr{}, off_rms{};
  std::array<double, 3> on_median{}, on_iqr{}, on_rms{};
  std::array<double, 3> median_change_pct{};  // positive = improvement
  std::array<double, 3> rms_change_pct{};
};

TrackingReport tracking_report(const sim::EpisodeLog& log_on,
                               const sim::EpisodeLog& log_off);

std::string to_text(const PredictionReport& report);
std::string to_text(const TrackingReport& report);
std::string to_csv(const PredictionReport& report);
std::string to_csv(const TrackingReport& report);

}  // namespace tilthex::metrics
