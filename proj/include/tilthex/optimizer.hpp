#pragma once

#include <Eigen/Core>

#include <functional>

namespace tilthex::opt {

/// Objective callback: fill grad and return the function value at x.
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct Options {
  int max_iterations = 50;
  double gradient_tolerance = 1e-8;
  int history = 8;              // L-BFGS memory
  int max_line_search = 30;     // backtracking halvings
  double armijo_c1 = 1e-4;
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;          // gradient tolerance reached
  bool line_search_failed = false; // no step gave sufficient decrease
};

/// Limited-memory BFGS with Armijo backtracking. Deterministic: no
/// randomization, fixed evaluation order. Falls back to the steepest-descent
/// direction whenever the two-loop direction is not a descent direction.
Result minimize(const Objective& f, Eigen::VectorXd x0, const Options& opts = {});

}  // namespace tilthex::opt
