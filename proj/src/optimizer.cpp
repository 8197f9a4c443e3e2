#include "tilthex/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace tilthex::opt {

namespace {

struct Correction {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop_direction(const std::deque<Correction>& mem,
                                   const Eigen::VectorXd& grad) {
  Eigen::VectorXd q = -grad;
  std::vector<double> alpha(mem.size());
  for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const auto& last = mem.back();
    const double gamma = last.s.dot(last.y) / last.y.squaredNorm();
    q *= gamma;
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return q;
}

}  // namespace

Result minimize(const Objective& f, Eigen::VectorXd x0, const Options& opts) {
  constexpr double kWolfeC2 = 0.9;
  const auto n = x0.size();
  Eigen::VectorXd grad(n);
  double value = f(x0, grad);

  Result res;
  res.x = x0;
  res.value = value;
  if (!std::isfinite(value) || !grad.allFinite()) {
    res.line_search_failed = true;
    return res;
  }

  std::deque<Correction> mem;
  Eigen::VectorXd x = x0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (grad.norm() <= opts.gradient_tolerance * std::max(1.0, x.norm())) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd dir = two_loop_direction(mem, grad);
    double slope = grad.dot(dir);
    if (!(slope < 0.0) || !dir.allFinite()) {
      dir = -grad;
      slope = -grad.squaredNorm();
      mem.clear();
    }

    // Weak-Wolfe bisection (Lewis-Overton): sufficient decrease plus a
    // curvature condition, so the accepted step yields s'y > 0 and the
    // quasi-Newton memory stays well scaled.
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new(n), grad_new(n);
    double value_new = value;
    // Fallback: remember the best Armijo-satisfying point in case the
    // curvature condition is never met within the budget.
    bool have_armijo = false;
    Eigen::VectorXd x_armijo(n), grad_armijo(n);
    double value_armijo = 0.0;

    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      x_new = x + t * dir;
      value_new = f(x_new, grad_new);
      const bool finite = std::isfinite(value_new) && grad_new.allFinite();
      if (!finite || value_new > value + opts.armijo_c1 * t * slope) {
        hi = t;
      } else if (grad_new.dot(dir) < kWolfeC2 * slope) {
        lo = t;
        have_armijo = true;
        x_armijo = x_new;
        grad_armijo = grad_new;
        value_armijo = value_new;
      } else {
        accepted = true;
        break;
      }
      t = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * t;
    }
    if (!accepted) {
      if (have_armijo) {
        x_new = x_armijo;
        grad_new = grad_armijo;
        value_new = value_armijo;
      } else {
        res.line_search_failed = true;
        break;
      }
    }

    Correction c;
    c.s = x_new - x;
    c.y = grad_new - grad;
    const double sy = c.s.dot(c.y);
    if (sy > 1e-14 * c.s.norm() * c.y.norm()) {
      c.rho = 1.0 / sy;
      mem.push_back(std::move(c));
      if (static_cast<int>(mem.size()) > opts.history) mem.pop_front();
    }

    x = x_new;
    grad = grad_new;
    value = value_new;
    res.iterations = iter + 1;
  }

  res.x = x;
  res.value = value;
  return res;
}

}  // namespace tilthex::opt
