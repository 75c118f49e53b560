// Counterfactual tests: displacements and their interpreted images,
// constrained subspaces, quadratic plausibility costs, and the
// preference-reversal search over non-proportional cost geometries.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "vsdyn/counterfactuals.hpp"

using vsdyn::AffineSubspace;
using vsdyn::constrain_subspace;
using vsdyn::counterfactual_cost;
using vsdyn::displacement;
using vsdyn::find_preference_reversal;
using vsdyn::InterpretationMap;
using vsdyn::Mat;
using vsdyn::perspective_displacement;
using vsdyn::ReversalVerdict;
using vsdyn::Vec;

namespace {

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Mat random_spd(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  return Mat(a * a.transpose() + 0.3 * Mat::Identity(n, n));
}

Mat random_orthogonal(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  const Eigen::HouseholderQR<Mat> qr(a);
  return Mat(qr.householderQ());
}

}  // namespace

TEST_CASE("displacement encodes the hypothetical shift", "[counterfactual]") {
  // A family-centered state contemplating a high-demand promotion.
  const Vec c = make_vec({2.0, 6.0});
  const Vec x = make_vec({7.0, 3.0});
  const Vec d = displacement(c, x);
  CHECK(d(0) == 5.0);
  CHECK(d(1) == -3.0);
  CHECK_THROWS_AS(displacement(c, make_vec({1.0, 2.0, 3.0})),
                  vsdyn::DimensionMismatch);
}

TEST_CASE("perspective displacement rescales the tradeoff",
          "[counterfactual]") {
  Mat t = Mat::Zero(2, 2);
  t.diagonal() << 0.6, 1.4;  // contracts career, expands family
  const InterpretationMap map{"i", "j", t};
  const Vec seen =
      perspective_displacement(map, make_vec({2.0, 6.0}), make_vec({7.0, 3.0}));
  CHECK(seen(0) == Catch::Approx(3.0));
  CHECK(seen(1) == Catch::Approx(-4.2));
}

TEST_CASE("constrained subspaces pin coordinates", "[counterfactual]") {
  const AffineSubspace s = constrain_subspace(3, {{1, 2.5}});
  CHECK(s.offset(0) == 0.0);
  CHECK(s.offset(1) == 2.5);
  CHECK(s.offset(2) == 0.0);
  REQUIRE(s.basis.size() == 2);
  CHECK(s.basis[0](0) == 1.0);
  CHECK(s.basis[1](2) == 1.0);
  // Any point of the subspace keeps the pinned coordinate.
  const Vec p = s.offset + 0.7 * s.basis[0] - 1.3 * s.basis[1];
  CHECK(p(1) == 2.5);

  CHECK(constrain_subspace(2, {}).basis.size() == 2);
  CHECK(constrain_subspace(2, {{0, 1.0}, {1, 2.0}}).basis.empty());
  CHECK_THROWS_AS(constrain_subspace(0, {}), vsdyn::BadParameter);
  CHECK_THROWS_AS(constrain_subspace(2, {{2, 1.0}}), vsdyn::BadIndex);
  CHECK_THROWS_AS(constrain_subspace(2, {{0, 1.0}, {0, 2.0}}), vsdyn::BadIndex);
}

TEST_CASE("quadratic cost weighs displacements", "[counterfactual]") {
  const Vec d = make_vec({5.0, -3.0});
  CHECK(counterfactual_cost(d, Mat::Identity(2, 2)) == Catch::Approx(34.0));
  Mat w = Mat::Zero(2, 2);
  w.diagonal() << 1.0, 2.0;  // losses on the second axis weigh double
  CHECK(counterfactual_cost(d, w) == Catch::Approx(43.0));

  Mat asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(counterfactual_cost(d, asym), vsdyn::NotSymmetric);
  Mat indef = Mat::Identity(2, 2);
  indef(1, 1) = -1.0;
  CHECK_THROWS_AS(counterfactual_cost(d, indef), vsdyn::NotPositiveDefinite);
  CHECK_THROWS_AS(counterfactual_cost(make_vec({1.0}), Mat::Identity(2, 2)),
                  vsdyn::DimensionMismatch);
}

TEST_CASE("non-similar maps always admit a reversal witness",
          "[counterfactual][reversal]") {
  Mat t = Mat::Zero(2, 2);
  t.diagonal() << 0.6, 1.4;
  const InterpretationMap map{"i", "j", t};
  const Vec c = make_vec({2.0, 6.0});
  const Mat id = Mat::Identity(2, 2);

  const auto result = find_preference_reversal(id, map, id, c);
  CHECK(result.verdict == ReversalVerdict::WitnessFound);
  REQUIRE(result.eigenvalues.size() == 2);
  CHECK(result.eigenvalues[0] == Catch::Approx(0.36));
  CHECK(result.eigenvalues[1] == Catch::Approx(1.96));
  REQUIRE(result.witness.has_value());
  const auto& w = *result.witness;

  // Replay the four costs from first principles: agent i prefers x, agent j
  // (through the map) prefers y, both strictly.
  const double ci_x = counterfactual_cost(displacement(c, w.x), id);
  const double ci_y = counterfactual_cost(displacement(c, w.y), id);
  const double cj_x =
      counterfactual_cost(perspective_displacement(map, c, w.x), id);
  const double cj_y =
      counterfactual_cost(perspective_displacement(map, c, w.y), id);
  CHECK(ci_x < ci_y);
  CHECK(cj_y < cj_x);
  CHECK(ci_x == Catch::Approx(w.cost_i_x));
  CHECK(ci_y == Catch::Approx(w.cost_i_y));
  CHECK(cj_x == Catch::Approx(w.cost_j_x));
  CHECK(cj_y == Catch::Approx(w.cost_j_y));
  // The inflation step guarantees working margins.
  CHECK(w.cost_i_y - w.cost_i_x >= 0.9e-6);
  CHECK(w.cost_j_x - w.cost_j_y >= 0.9e-6);
}

TEST_CASE("similarity maps yield no reversal", "[counterfactual][reversal]") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const double s = 0.3 + 2.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const InterpretationMap map{"i", "j", Mat(s * random_orthogonal(rng, n))};
    const auto result = find_preference_reversal(
        Mat::Identity(n, n), map, Mat::Identity(n, n), Vec::Zero(n));
    CHECK(result.verdict == ReversalVerdict::Proportional);
    CHECK_FALSE(result.witness.has_value());
    // The whole spectrum collapses onto s^2.
    for (double l : result.eigenvalues) CHECK(l == Catch::Approx(s * s));
  }
}

TEST_CASE("proportional forms never disagree on sampled orderings",
          "[counterfactual][reversal][property]") {
  std::mt19937_64 rng(5678);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const int n = 3;
  const double s = 1.7;
  const Mat q = random_orthogonal(rng, n);
  const InterpretationMap map{"i", "j", Mat(s * q)};
  const Mat id = Mat::Identity(n, n);
  const Vec c = make_vec({0.5, -1.0, 2.0});
  for (int k = 0; k < 200; ++k) {
    Vec x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x(i) = u(rng);
      y(i) = u(rng);
    }
    const double ci_x = counterfactual_cost(displacement(c, x), id);
    const double ci_y = counterfactual_cost(displacement(c, y), id);
    const double cj_x =
        counterfactual_cost(perspective_displacement(map, c, x), id);
    const double cj_y =
        counterfactual_cost(perspective_displacement(map, c, y), id);
    CHECK((ci_x < ci_y) == (cj_x < cj_y));
  }
}

TEST_CASE("reversal search on random non-proportional geometries",
          "[counterfactual][reversal][property]") {
  std::mt19937_64 rng(24601);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int witnesses = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const Mat wi = random_spd(rng, n);
    const Mat wj = random_spd(rng, n);
    Mat t(n, n);
    do {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) = u(rng);
    } while (vsdyn::rank(t) < n);
    const InterpretationMap map{"i", "j", t};
    Vec c(n);
    for (int i = 0; i < n; ++i) c(i) = u(rng);

    const auto result = find_preference_reversal(wi, map, wj, c);
    if (result.verdict == ReversalVerdict::Proportional) continue;
    ++witnesses;
    REQUIRE(result.witness.has_value());
    const auto& w = *result.witness;
    const double ci_x = counterfactual_cost(displacement(c, w.x), wi);
    const double ci_y = counterfactual_cost(displacement(c, w.y), wi);
    const double cj_x =
        counterfactual_cost(perspective_displacement(map, c, w.x), wj);
    const double cj_y =
        counterfactual_cost(perspective_displacement(map, c, w.y), wj);
    CHECK(ci_x < ci_y);
    CHECK(cj_y < cj_x);
  }
  // Random geometries are essentially never exact similarities.
  CHECK(witnesses == 100);
}

TEST_CASE("reversal search accepts rectangular injective maps",
          "[counterfactual][reversal]") {
  Mat t(3, 2);
  t << 1.0, 0.0, 0.0, 1.0, 0.5, 0.5;
  const InterpretationMap map{"i", "j", t};
  const auto result = find_preference_reversal(
      Mat::Identity(2, 2), map, Mat::Identity(3, 3), Vec::Zero(2));
  CHECK(result.eigenvalues.size() == 2);
  if (result.verdict == ReversalVerdict::WitnessFound) {
    REQUIRE(result.witness.has_value());
    CHECK(result.witness->x.size() == 2);
  }
}

TEST_CASE("reversal search input validation", "[counterfactual][reversal]") {
  const Mat id2 = Mat::Identity(2, 2);
  Mat drop = Mat::Zero(2, 2);
  drop(0, 0) = 1.0;  // rank 1: not injective
  CHECK_THROWS_AS(find_preference_reversal(id2, InterpretationMap{"i", "j", drop},
                                           id2, Vec::Zero(2)),
                  vsdyn::NotInjective);
  CHECK_THROWS_AS(
      find_preference_reversal(id2, InterpretationMap{"i", "j", Mat::Identity(3, 3)},
                               id2, Vec::Zero(2)),
      vsdyn::DimensionMismatch);
  CHECK_THROWS_AS(find_preference_reversal(id2, InterpretationMap{"i", "j", id2},
                                           id2, Vec::Zero(3)),
                  vsdyn::DimensionMismatch);
  Mat indef = Mat::Identity(2, 2);
  indef(0, 0) = -2.0;
  CHECK_THROWS_AS(find_preference_reversal(indef, InterpretationMap{"i", "j", id2},
                                           id2, Vec::Zero(2)),
                  vsdyn::NotPositiveDefinite);
}
