#include <doctest.h>

#include <cmath>

#include "tilthex/random.hpp"
#include "tilthex/rigid_body.hpp"

using namespace tilthex;
using rigid_body::DynamicsOptions;
using rigid_body::InertialParams;
using rigid_body::State;

namespace {

Wrench body_wrench(const Vec3& f, const Vec3& m) {
  return Wrench{f, m, Frame::Body};
}

State random_state(Rng& rng) {
  State s;
  s.position = rng.normal3();
  s.velocity = rng.normal3();
  s.angular_velocity = 2.0 * rng.normal3();
  const Vec3 axis = rng.normal3().normalized();
  s.attitude = Quat(Eigen::AngleAxisd(rng.uniform(0.0, M_PI), axis));
  return s;
}

}  // namespace

TEST_SUITE("rigid_body") {

TEST_CASE("hover equilibrium has zero acceleration") {
  InertialParams params;
  const auto d = rigid_body::derivative(
      State{}, body_wrench(Vec3(0, 0, params.mass * kGravity), Vec3::Zero()),
      params, kGravity);
  CHECK(d.velocity_dot.norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d.angular_velocity_dot.norm() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d.position_dot.norm() == 0.0);
}

TEST_CASE("free fall accelerates at -g with z up") {
  const auto d = rigid_body::derivative(State{}, body_wrench(Vec3::Zero(), Vec3::Zero()),
                                        InertialParams{}, 9.81);
  CHECK(d.velocity_dot.x() == 0.0);
  CHECK(d.velocity_dot.y() == 0.0);
  CHECK(d.velocity_dot.z() == doctest::Approx(-9.81));
}

TEST_CASE("angular acceleration matches an independent dense solve") {
  // Oracle: solve I wdot = M - w x I w with a plain LU factorization built
  // from scratch, against the module's evaluation.
  Rng rng(71);
  for (int trial = 0; trial < 25; ++trial) {
    InertialParams params;
    params.mass = rng.uniform(1.0, 8.0);
    Mat3 a;
    a << rng.normal(), rng.normal(), rng.normal(),
         rng.normal(), rng.normal(), rng.normal(),
         rng.normal(), rng.normal(), rng.normal();
    params.inertia = a * a.transpose() + 0.5 * Mat3::Identity();

    const State s = random_state(rng);
    const Vec3 f = 5.0 * rng.normal3();
    const Vec3 m = 2.0 * rng.normal3();
    const auto d = rigid_body::derivative(s, body_wrench(f, m), params, kGravity);

    const Vec3 rhs = m - s.angular_velocity.cross(params.inertia * s.angular_velocity);
    const Vec3 expected = params.inertia.fullPivLu().solve(rhs);
    CHECK((d.angular_velocity_dot - expected).norm() < 1e-10);
  }
}

TEST_CASE("gyroscopic term can be disabled to match the simplified model") {
  Rng rng(3);
  const State s = random_state(rng);
  InertialParams params;
  const Vec3 m(0.3, -0.2, 0.1);
  const auto d = rigid_body::derivative(s, body_wrench(Vec3::Zero(), m), params,
                                        0.0, DynamicsOptions{false});
  const Vec3 expected = params.inertia.ldlt().solve(m);
  CHECK((d.angular_velocity_dot - expected).norm() < 1e-12);
}

TEST_CASE("non-finite input is rejected") {
  State s;
  s.velocity.x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rigid_body::derivative(s, body_wrench(Vec3::Zero(), Vec3::Zero()),
                                         InertialParams{}, kGravity),
                  std::invalid_argument);
}

TEST_CASE("invalid params are rejected") {
  InertialParams bad;
  bad.mass = -1.0;
  CHECK_THROWS_AS(rigid_body::validate(bad), std::invalid_argument);
  InertialParams asym;
  asym.inertia(0, 1) = 1e-6;
  CHECK_THROWS_AS(rigid_body::validate(asym), std::invalid_argument);
}

TEST_CASE("step at hover equilibrium is the identity") {
  InertialParams params;
  const State s0;
  const auto s1 = rigid_body::step(
      s0, body_wrench(Vec3(0, 0, params.mass * kGravity), Vec3::Zero()), params, 1e-3);
  CHECK((s1.position - s0.position).norm() < 1e-12);
  CHECK((s1.velocity - s0.velocity).norm() < 1e-12);
  CHECK((s1.angular_velocity - s0.angular_velocity).norm() < 1e-12);
  CHECK(std::abs(s1.attitude.angularDistance(s0.attitude)) < 1e-12);
}

TEST_CASE("dt bounds enforced") {
  CHECK_THROWS_AS(rigid_body::step(State{}, body_wrench(Vec3::Zero(), Vec3::Zero()),
                                   InertialParams{}, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(rigid_body::step(State{}, body_wrench(Vec3::Zero(), Vec3::Zero()),
                                   InertialParams{}, 0.02),
                  std::invalid_argument);
}

TEST_CASE("single-axis spin-up matches the closed form") {
  InertialParams params;
  const double izz = params.inertia(2, 2);
  State s;
  const Wrench w = body_wrench(Vec3::Zero(), Vec3(0, 0, 0.1));
  for (int i = 0; i < 1000; ++i) {
    s = rigid_body::step(s, w, params, 1e-3, 0.0);
  }
  CHECK(std::abs(s.angular_velocity.z() - 0.1 / izz) < 1e-6);
  CHECK(std::abs(s.angular_velocity.x()) < 1e-9);
  CHECK(std::abs(s.angular_velocity.y()) < 1e-9);
}

TEST_CASE("quaternion stays normalized over long integrations") {
  Rng rng(5);
  State s = random_state(rng);
  InertialParams params;
  const Wrench w = body_wrench(Vec3(0.5, -0.2, 39.0), Vec3(0.05, 0.1, -0.02));
  for (int i = 0; i < 5000; ++i) {
    s = rigid_body::step(s, w, params, 1e-3);
    REQUIRE(std::abs(s.attitude.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("halving dt moves the 1 s endpoint by less than 1e-8") {
  Rng rng(11);
  State coarse = random_state(rng);
  State fine = coarse;
  InertialParams params;
  const Wrench w = body_wrench(Vec3(1.0, 0.5, 38.0), Vec3(0.1, -0.05, 0.02));
  for (int i = 0; i < 1000; ++i) coarse = rigid_body::step(coarse, w, params, 1e-3);
  for (int i = 0; i < 2000; ++i) fine = rigid_body::step(fine, w, params, 5e-4);
  CHECK((coarse.position - fine.position).norm() < 1e-8);
  CHECK((coarse.velocity - fine.velocity).norm() < 1e-8);
  CHECK((coarse.angular_velocity - fine.angular_velocity).norm() < 1e-8);
}

TEST_CASE("energy and inertial angular momentum conserved without wrench or gravity") {
  Rng rng(13);
  State s = random_state(rng);
  s.velocity = Vec3(0.3, -0.2, 0.1);
  s.angular_velocity = Vec3(0.7, -0.4, 1.1);
  InertialParams params;

  auto energy = [&](const State& st) {
    return 0.5 * params.mass * st.velocity.squaredNorm() +
           0.5 * st.angular_velocity.dot(params.inertia * st.angular_velocity);
  };
  auto momentum = [&](const State& st) {
    return Vec3(st.attitude.toRotationMatrix() * (params.inertia * st.angular_velocity));
  };

  const double e0 = energy(s);
  const Vec3 l0 = momentum(s);
  const Wrench none = body_wrench(Vec3::Zero(), Vec3::Zero());
  for (int i = 0; i < 10000; ++i) s = rigid_body::step(s, none, params, 1e-3, 0.0);
  CHECK(std::abs(energy(s) - e0) < 1e-7);
  CHECK((momentum(s) - l0).norm() < 1e-7);
}

TEST_CASE("step is bit-deterministic") {
  Rng rng(17);
  const State s = random_state(rng);
  InertialParams params;
  const Wrench w = body_wrench(Vec3(0.3, 0.1, 40.0), Vec3(0.02, 0.03, -0.01));
  const auto a = rigid_body::step(s, w, params, 1e-3);
  const auto b = rigid_body::step(s, w, params, 1e-3);
  CHECK(a.position == b.position);
  CHECK(a.velocity == b.velocity);
  CHECK(a.attitude.coeffs() == b.attitude.coeffs());
  CHECK(a.angular_velocity == b.angular_velocity);
}

}  // TEST_SUITE
