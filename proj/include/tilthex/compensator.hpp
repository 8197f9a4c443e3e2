#pragma once

#include "tilthex/gp.hpp"
#include "tilthex/types.hpp"

namespace tilthex::compensator {

struct CompensatorConfig {
  double residual_threshold = 1e-4;  // accept the optimum below this cost
  int max_iterations = 50;
  double regularization = 0.0;       // lambda on ||W_cmd||^2
  double filter_a = 0.9;             // memory decay, in (0,1)
  double filter_kappa = 200.0;       // sigmoid steepness, per N*m
  double sigma_threshold = 0.0;      // 0 -> use the model's suggested value
  bool warm_start = true;
  bool filter_enabled = true;

  bool valid() const {
    return residual_threshold > 0.0 && max_iterations > 0 &&
           regularization >= 0.0 && filter_a > 0.0 && filter_a < 1.0 &&
           filter_kappa > 0.0;
  }
};

struct CompensatorState {
  Vec6 delta_prev{Vec6::Zero()};
  Vec6 last_iterate{Vec6::Zero()};
  double beta = 0.0;
};

struct SolveResult {
  Vec6 delta{Vec6::Zero()};
  double cost = 0.0;
  int iterations = 0;
  bool diverged = false;  // optimizer made no progress; delta fell back
};

/// Minimizes J(dW) = ||mu(W_des + dW) + dW||^2 (+ lambda ||W_des + dW||^2)
/// by L-BFGS over the six wrench components, warm-started from the state.
/// If the optimum misses the residual threshold, returns whichever of the
/// optimum and dW = 0 has the smaller cost, so the result never scores
/// worse than no compensation.
SolveResult solve_compensation(const Vec6& w_des, const gp::GpModel& model,
                               const CompensatorConfig& cfg,
                               const CompensatorState& state);

struct FilterResult {
  Vec6 delta{Vec6::Zero()};
  double beta = 0.0;
  double sigma = 0.0;
};

/// Uncertainty gate: sigma = worst-axis posterior std at W_des + dW*,
/// beta = sigmoid(kappa (sigma - sigma_th)), and the published signal is
/// a beta dW_prev + (1 - beta) dW*. The state stores the filtered value.
FilterResult uncertainty_filter(const Vec6& delta_star, const Vec6& w_des,
                                const gp::GpModel& model,
                                const CompensatorConfig& cfg,
                                CompensatorState& state);

}  // namespace tilthex::compensator
