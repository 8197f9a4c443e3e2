#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "tilthex/optimizer.hpp"

using namespace tilthex;

TEST_SUITE("optimizer") {

TEST_CASE("convex quadratic converges to the known minimizer") {
  Eigen::MatrixXd a(3, 3);
  a << 4.0, 1.0, 0.0,
       1.0, 3.0, 0.5,
       0.0, 0.5, 2.0;
  const Eigen::VectorXd b = Eigen::Vector3d(1.0, -2.0, 0.5);
  const Eigen::VectorXd x_star = a.ldlt().solve(b);

  const auto res = opt::minimize(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = a * x - b;
        return 0.5 * x.dot(a * x) - b.dot(x);
      },
      Eigen::VectorXd::Zero(3), {});
  CHECK(res.converged);
  CHECK((res.x - x_star).norm() < 1e-7);
}

TEST_CASE("rosenbrock reaches the valley minimum") {
  opt::Options opts;
  opts.max_iterations = 500;
  const auto res = opt::minimize(
      [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double a = 1.0 - x(0);
        const double b = x(1) - x(0) * x(0);
        g.resize(2);
        g(0) = -2.0 * a - 400.0 * x(0) * b;
        g(1) = 200.0 * b;
        return a * a + 100.0 * b * b;
      },
      Eigen::Vector2d(-1.2, 1.0), opts);
  CHECK((res.x - Eigen::Vector2d(1.0, 1.0)).norm() < 1e-5);
}

TEST_CASE("iteration budget is honored") {
  opt::Options opts;
  opts.max_iterations = 3;
  const auto res = opt::minimize(
      [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2.0 * x;
        return x.squaredNorm();
      },
      Eigen::VectorXd::Constant(4, 10.0), opts);
  CHECK(res.iterations <= 3);
}

TEST_CASE("infinite objective regions are backed away from") {
  // f is +inf left of x = 0; the minimizer solves 2(x-1) = 1/x.
  const auto res = opt::minimize(
      [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(1);
        if (x(0) <= 0.0) {
          g(0) = 0.0;
          return std::numeric_limits<double>::infinity();
        }
        g(0) = 2.0 * (x(0) - 1.0) - 1.0 / x(0);
        return (x(0) - 1.0) * (x(0) - 1.0) - std::log(x(0));
      },
      Eigen::VectorXd::Constant(1, 0.5), {});
  CHECK(res.x(0) > 0.0);
  CHECK(std::abs(res.x(0) - 0.5 * (1.0 + std::sqrt(3.0))) < 1e-5);
}

TEST_CASE("deterministic across repeated runs") {
  auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 4.0 * x.array().cube().matrix();
    return x.array().square().square().sum();
  };
  const auto r1 = opt::minimize(f, Eigen::VectorXd::Constant(5, 2.0), {});
  const auto r2 = opt::minimize(f, Eigen::VectorXd::Constant(5, 2.0), {});
  CHECK(r1.x == r2.x);
  CHECK(r1.value == r2.value);
}

}  // TEST_SUITE
