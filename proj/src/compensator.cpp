#include "tilthex/compensator.hpp"

#include <cmath>
#include <stdexcept>

#include "tilthex/optimizer.hpp"

namespace tilthex::compensator {

namespace {

double cost_and_gradient(const Vec6& delta, const Vec6& w_des,
                         const gp::GpModel& model, double lambda, Vec6* grad) {
  const Vec6 query = w_des + delta;
  const Vec6 residual = model.predict(query).mean + delta;
  double value = residual.squaredNorm();
  if (grad != nullptr) {
    const Mat6 jac = model.mean_jacobian(query);
    *grad = 2.0 * (jac.transpose() + Mat6::Identity()) * residual;
  }
  if (lambda > 0.0) {
    value += lambda * query.squaredNorm();
    if (grad != nullptr) *grad += 2.0 * lambda * query;
  }
  return value;
}

}  // namespace

SolveResult solve_compensation(const Vec6& w_des, const gp::GpModel& model,
                               const CompensatorConfig& cfg,
                               const CompensatorState& state) {
  if (!cfg.valid()) {
    throw std::invalid_argument("solve_compensation: invalid config");
  }
  if (!w_des.allFinite()) {
    throw std::invalid_argument("solve_compensation: non-finite W_des");
  }
  if (!model.fitted()) {
    throw std::runtime_error("solve_compensation: model not fitted");
  }

  Eigen::VectorXd x0 = cfg.warm_start ? Eigen::VectorXd(state.last_iterate)
                                      : Eigen::VectorXd(Vec6::Zero());
  opt::Options opts;
  opts.max_iterations = cfg.max_iterations;
  opts.gradient_tolerance = 1e-8;

  const auto res = opt::minimize(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        Vec6 grad;
        const double v = cost_and_gradient(Vec6(x), w_des, model,
                                           cfg.regularization, &grad);
        g = grad;
        return v;
      },
      x0, opts);

  SolveResult out;
  out.iterations = res.iterations;

  Vec6 best = res.x;
  double best_cost = res.value;
  if (!best.allFinite() || !std::isfinite(best_cost)) {
    best = Vec6::Zero();
    best_cost = cost_and_gradient(best, w_des, model, cfg.regularization, nullptr);
    out.diverged = true;
  }

  if (best_cost >= cfg.residual_threshold) {
    // Fall back: compare against no compensation and keep the cheaper one.
    const double zero_cost =
        cost_and_gradient(Vec6::Zero(), w_des, model, cfg.regularization, nullptr);
    if (zero_cost <= best_cost) {
      best = Vec6::Zero();
      best_cost = zero_cost;
    }
  }
  out.delta = best;
  out.cost = best_cost;
  return out;
}

FilterResult uncertainty_filter(const Vec6& delta_star, const Vec6& w_des,
                                const gp::GpModel& model,
                                const CompensatorConfig& cfg,
                                CompensatorState& state) {
  if (!cfg.valid()) {
    throw std::invalid_argument("uncertainty_filter: invalid config");
  }
  const double sigma_th = cfg.sigma_threshold > 0.0
                              ? cfg.sigma_threshold
                              : model.sigma_threshold_default();

  FilterResult out;
  out.sigma = model.predict(w_des + delta_star).std.maxCoeff();
  out.beta = 1.0 / (1.0 + std::exp(-cfg.filter_kappa * (out.sigma - sigma_th)));
  // the sigmoid saturates in double precision for steep kappa
  out.beta = std::clamp(out.beta, 1e-12, 1.0 - 1e-12);
  out.delta = cfg.filter_a * out.beta * state.delta_prev +
              (1.0 - out.beta) * delta_star;
  state.delta_prev = out.delta;
  state.beta = out.beta;
  return out;
}

}  // namespace tilthex::compensator
