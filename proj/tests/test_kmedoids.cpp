#include <doctest.h>

#include <set>

#include "tilthex/gp.hpp"
#include "tilthex/random.hpp"

using namespace tilthex;
using namespace tilthex::gp;

namespace {

TrainingSet make_set(const Eigen::Matrix<double, Eigen::Dynamic, 6>& inputs) {
  TrainingSet set;
  set.inputs = inputs;
  set.targets = Eigen::Matrix<double, Eigen::Dynamic, 6>::Zero(inputs.rows(), 6);
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    set.times.push_back(static_cast<double>(i));
  }
  return set;
}

}  // namespace

TEST_SUITE("kmedoids") {

TEST_CASE("k equal to N returns every point") {
  Rng rng(1);
  Eigen::Matrix<double, Eigen::Dynamic, 6> x(8, 6);
  for (int i = 0; i < 8; ++i) {
    for (int d = 0; d < 6; ++d) x(i, d) = rng.normal();
  }
  const auto out = kmedoids_subsample(make_set(x), 8, 42);
  CHECK(out.size() == 8);
  CHECK((out.inputs - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("k larger than N is rejected") {
  Rng rng(2);
  Eigen::Matrix<double, Eigen::Dynamic, 6> x(4, 6);
  for (int i = 0; i < 4; ++i) {
    for (int d = 0; d < 6; ++d) x(i, d) = rng.normal();
  }
  CHECK_THROWS_AS(kmedoids_subsample(make_set(x), 5, 1), std::invalid_argument);
}

TEST_CASE("three well-separated blobs get one medoid each") {
  Rng rng(3);
  const int per_blob = 40;
  Eigen::Matrix<double, Eigen::Dynamic, 6> x(3 * per_blob, 6);
  std::array<Vec6, 3> centers;
  centers[0] = Vec6::Constant(0.0);
  centers[1] = Vec6::Constant(20.0);
  centers[2] = -Vec6::Constant(20.0);
  for (int b = 0; b < 3; ++b) {
    for (int i = 0; i < per_blob; ++i) {
      for (int d = 0; d < 6; ++d) {
        x(b * per_blob + i, d) = centers[b](d) + 0.5 * rng.normal();
      }
    }
  }

  const auto out = kmedoids_subsample(make_set(x), 3, 7);
  REQUIRE(out.size() == 3);

  // Exhaustive assignment check: each medoid must be nearest to a distinct
  // blob center and close to it.
  std::set<int> blobs_hit;
  for (int m = 0; m < 3; ++m) {
    int nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int b = 0; b < 3; ++b) {
      const double d = (out.inputs.row(m).transpose() - centers[b]).squaredNorm();
      if (d < best) {
        best = d;
        nearest = b;
      }
    }
    CHECK(best < 25.0);
    blobs_hit.insert(nearest);
  }
  CHECK(blobs_hit.size() == 3);
}

TEST_CASE("medoids are actual dataset members") {
  Rng rng(5);
  Eigen::Matrix<double, Eigen::Dynamic, 6> x(50, 6);
  for (int i = 0; i < 50; ++i) {
    for (int d = 0; d < 6; ++d) x(i, d) = rng.normal();
  }
  const auto set = make_set(x);
  const auto out = kmedoids_subsample(set, 10, 11);
  REQUIRE(out.size() == 10);
  for (Eigen::Index m = 0; m < out.size(); ++m) {
    bool found = false;
    for (Eigen::Index i = 0; i < set.size(); ++i) {
      if ((out.inputs.row(m) - set.inputs.row(i)).cwiseAbs().maxCoeff() == 0.0) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("duplicate input rows are collapsed before clustering") {
  Rng rng(7);
  Eigen::Matrix<double, Eigen::Dynamic, 6> x(30, 6);
  for (int i = 0; i < 10; ++i) {
    Vec6 v;
    for (int d = 0; d < 6; ++d) v(d) = rng.normal();
    x.row(3 * i) = v.transpose();
    x.row(3 * i + 1) = v.transpose();
    x.row(3 * i + 2) = v.transpose();
  }
  const auto out = kmedoids_subsample(make_set(x), 5, 13);
  REQUIRE(out.size() == 5);
  for (Eigen::Index a = 0; a < out.size(); ++a) {
    for (Eigen::Index b = a + 1; b < out.size(); ++b) {
      CHECK((out.inputs.row(a) - out.inputs.row(b)).cwiseAbs().maxCoeff() > 0.0);
    }
  }
}

TEST_CASE("deterministic per seed") {
  Rng rng(9);
  Eigen::Matrix<double, Eigen::Dynamic, 6> x(200, 6);
  for (int i = 0; i < 200; ++i) {
    for (int d = 0; d < 6; ++d) x(i, d) = rng.normal();
  }
  const auto set = make_set(x);
  const auto a = kmedoids_subsample(set, 20, 123);
  const auto b = kmedoids_subsample(set, 20, 123);
  CHECK((a.inputs - b.inputs).cwiseAbs().maxCoeff() == 0.0);
  const auto c = kmedoids_subsample(set, 20, 124);
  CHECK(c.size() == 20);  // different seed still returns a valid clustering
}

}  // TEST_SUITE
