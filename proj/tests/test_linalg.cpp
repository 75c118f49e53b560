// Kernel tests: rank / null space / pseudo-inverse cutoffs, cosine, hull
// membership against a separating-hyperplane oracle, least-squares fitting,
// and the symmetric-definite generalized eigensolver.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "vsdyn/linalg.hpp"

using vsdyn::convex_hull_membership;
using vsdyn::cosine_similarity;
using vsdyn::fit_map_least_squares;
using vsdyn::generalized_eigenpairs;
using vsdyn::Mat;
using vsdyn::null_space_basis;
using vsdyn::pseudo_inverse;
using vsdyn::rank;
using vsdyn::rank_threshold;
using vsdyn::TolerancePolicy;
using vsdyn::Vec;

namespace {

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Mat random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

Mat random_spd(std::mt19937_64& rng, int n) {
  // Q^T D Q with eigenvalues bounded away from zero keeps the matrix well
  // inside the definite cone.
  const Mat a = random_matrix(rng, n, n);
  Eigen::HouseholderQR<Mat> qr(a);
  const Mat q = qr.householderQ();
  std::uniform_real_distribution<double> u(0.1, 3.0);
  Vec d(n);
  for (int i = 0; i < n; ++i) d(i) = u(rng);
  return q * d.asDiagonal() * q.transpose();
}

}  // namespace

TEST_CASE("rank basics", "[linalg][rank]") {
  CHECK(rank(Mat::Identity(3, 3)) == 3);
  CHECK(rank(Mat::Zero(2, 2)) == 0);
  Mat d = Mat::Zero(3, 3);
  d(1, 1) = 1.0;
  d(2, 2) = 1.0;
  CHECK(rank(d) == 2);
}

TEST_CASE("rank threshold anchors to sigma_max and shape", "[linalg][rank]") {
  Mat d = Vec::LinSpaced(3, 1.0, 3.0).reverse().asDiagonal();  // diag(3,2,1)
  const double eps = std::numeric_limits<double>::epsilon();
  CHECK(rank_threshold(d) == Catch::Approx(1e2 * eps * 3.0 * 3.0));
  CHECK(rank_threshold(Mat::Zero(4, 2)) == 0.0);
}

TEST_CASE("rank + nullity = columns on random factored matrices",
          "[linalg][rank][property]") {
  std::mt19937_64 rng(991);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<int> dim(1, 8);
    const int rows = dim(rng);
    const int cols = dim(rng);
    std::uniform_int_distribution<int> rdist(0, std::min(rows, cols));
    const int r = rdist(rng);
    Mat m = Mat::Zero(rows, cols);
    if (r > 0) m = random_matrix(rng, rows, r) * random_matrix(rng, r, cols);
    const int got = rank(m);
    CHECK(got == r);  // random factors are full-rank with probability one
    const auto basis = null_space_basis(m);
    CHECK(static_cast<int>(basis.size()) == cols - got);
    const double cutoff = rank_threshold(m);
    for (const Vec& v : basis) {
      CHECK(v.norm() == Catch::Approx(1.0).margin(1e-12));
      CHECK((m * v).norm() <= std::max(cutoff, 1e-12));
    }
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (std::size_t j = i + 1; j < basis.size(); ++j) {
        CHECK(std::abs(basis[i].dot(basis[j])) < 1e-10);
      }
    }
  }
}

TEST_CASE("null space of coordinate projections", "[linalg][nullspace]") {
  Mat proj = Mat::Zero(3, 3);  // annihilates the first axis only
  proj(1, 1) = 1.0;
  proj(2, 2) = 1.0;
  const auto basis = null_space_basis(proj);
  REQUIRE(basis.size() == 1);
  CHECK(std::abs(basis[0](0)) == Catch::Approx(1.0));
  CHECK(std::abs(basis[0](1)) < 1e-14);
  CHECK(std::abs(basis[0](2)) < 1e-14);

  CHECK(null_space_basis(Mat::Identity(4, 4)).empty());

  Mat nilpotent(2, 2);  // [[0,1],[0,0]] kills span{e1}
  nilpotent << 0.0, 1.0, 0.0, 0.0;
  const auto nb = null_space_basis(nilpotent);
  REQUIRE(nb.size() == 1);
  CHECK(std::abs(nb[0](0)) == Catch::Approx(1.0));
}

TEST_CASE("pseudo-inverse closed forms", "[linalg][pinv]") {
  CHECK((pseudo_inverse(Mat::Identity(3, 3)) - Mat::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2.0;
  const Mat p = pseudo_inverse(d);
  CHECK(p(0, 0) == Catch::Approx(0.5));
  CHECK(p(1, 1) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("pseudo-inverse satisfies the Moore-Penrose identities",
          "[linalg][pinv][property]") {
  std::mt19937_64 rng(1234);
  const std::vector<std::pair<int, int>> shapes{
      {3, 3}, {3, 5}, {5, 3}, {4, 4}, {6, 2}};
  for (const auto& [rows, cols] : shapes) {
    for (int trial = 0; trial < 8; ++trial) {
      Mat m = random_matrix(rng, rows, cols);
      if (trial % 2 == 1) {
        // Force rank deficiency through a thin factorization.
        const int r = std::max(1, std::min(rows, cols) - 1);
        m = random_matrix(rng, rows, r) * random_matrix(rng, r, cols);
      }
      const Mat p = pseudo_inverse(m);
      CHECK((m * p * m - m).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((p * m * p - p).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(((m * p) - (m * p).transpose()).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(((p * m) - (p * m).transpose()).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("cosine similarity", "[linalg][cosine]") {
  // Images of a shared concept under two 2->3 maps; the exact cosine, frozen
  // from an independent recomputation, is 0.95137 (a commonly quoted rounded
  // figure of 0.96 reflects two-decimal intermediate rounding).
  const Vec a = make_vec({1.1, 0.48, 0.0});
  const Vec b = make_vec({1.08, 0.14, 0.15});
  CHECK(cosine_similarity(a, b) ==
        Catch::Approx(0.9513669208191659).epsilon(1e-12));

  CHECK(cosine_similarity(make_vec({1.0, 0.0}), make_vec({0.0, 2.0})) ==
        Catch::Approx(0.0).margin(1e-15));
  CHECK(cosine_similarity(make_vec({1.0, 2.0}), make_vec({2.0, 4.0})) ==
        Catch::Approx(1.0));
  CHECK_THROWS_AS(cosine_similarity(make_vec({1.0}), make_vec({1.0, 2.0})),
                  vsdyn::DimensionMismatch);
  CHECK_THROWS_AS(cosine_similarity(make_vec({0.0, 0.0}), make_vec({1.0, 0.0})),
                  vsdyn::ZeroVector);
}

TEST_CASE("hull membership on the leadership-style example",
          "[linalg][hull]") {
  const std::vector<Vec> vertices{make_vec({1.0, 0.0, 0.0}),
                                  make_vec({0.0, 1.0, 0.0}),
                                  make_vec({0.0, 0.5, 1.0})};
  // The third coordinate forces the last weight to 1, which overshoots the
  // simplex constraint: infeasible, hence outside.
  const auto outside = convex_hull_membership(make_vec({0.6, 0.6, 1.0}), vertices);
  CHECK_FALSE(outside.inside);

  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto at_vertex = convex_hull_membership(vertices[i], vertices);
    REQUIRE(at_vertex.inside);
    CHECK(at_vertex.coefficients[i] == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("hull membership midpoint coefficients", "[linalg][hull]") {
  const std::vector<Vec> vertices{make_vec({0.0, 0.0}), make_vec({2.0, 2.0})};
  const auto mid = convex_hull_membership(make_vec({1.0, 1.0}), vertices);
  REQUIRE(mid.inside);
  REQUIRE(mid.coefficients.size() == 2);
  CHECK(mid.coefficients[0] == Catch::Approx(0.5).margin(1e-9));
  CHECK(mid.coefficients[1] == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("hull membership agrees with separation certificates",
          "[linalg][hull][property]") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 120; ++trial) {
    std::uniform_int_distribution<int> dim_dist(1, 3);
    const int dim = dim_dist(rng);
    std::uniform_int_distribution<int> count_dist(1, 5);
    const int count = count_dist(rng);
    std::vector<Vec> vertices;
    for (int i = 0; i < count; ++i) {
      vertices.push_back(random_matrix(rng, dim, 1).col(0));
    }

    // Inside witness: a random convex combination must certify INSIDE and
    // return weights that reconstruct the point within hull_tol.
    Vec weights(count);
    double total = 0.0;
    for (int i = 0; i < count; ++i) {
      weights(i) = u(rng) + 1e-3;
      total += weights(i);
    }
    weights /= total;
    Vec inside_point = Vec::Zero(dim);
    for (int i = 0; i < count; ++i) inside_point += weights(i) * vertices[i];
    const auto inside = convex_hull_membership(inside_point, vertices);
    REQUIRE(inside.inside);
    Vec rebuilt = Vec::Zero(dim);
    double sum = 0.0;
    for (int i = 0; i < count; ++i) {
      CHECK(inside.coefficients[i] >= -1e-12);
      rebuilt += inside.coefficients[i] * vertices[i];
      sum += inside.coefficients[i];
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    CHECK((rebuilt - inside_point).norm() <= 1e-9);

    // Outside witness: push past the support point of a random direction;
    // the hyperplane through it separates the point from every vertex.
    Vec direction = random_matrix(rng, dim, 1).col(0);
    if (direction.norm() < 1e-6) direction = Vec::Ones(dim);
    direction.normalize();
    double support = -1e300;
    Vec support_vertex = vertices[0];
    for (const Vec& v : vertices) {
      if (v.dot(direction) > support) {
        support = v.dot(direction);
        support_vertex = v;
      }
    }
    const Vec outside_point = support_vertex + 0.05 * direction;
    CHECK_FALSE(convex_hull_membership(outside_point, vertices).inside);
  }
}

TEST_CASE("least-squares map fitting", "[linalg][fit]") {
  std::mt19937_64 rng(4242);

  SECTION("recovers a full-rank map from spanning samples") {
    const Mat t = random_matrix(rng, 3, 3);
    std::vector<std::pair<Vec, Vec>> pairs;
    for (int i = 0; i < 6; ++i) {
      const Vec x = random_matrix(rng, 3, 1).col(0);
      pairs.emplace_back(x, t * x);
    }
    const Mat fitted = fit_map_least_squares(pairs);
    CHECK((fitted - t).cwiseAbs().maxCoeff() < 1e-8);
  }

  SECTION("single pair produces the obvious scale") {
    const Mat fitted =
        fit_map_least_squares({{make_vec({1.0}), make_vec({2.0})}});
    REQUIRE(fitted.rows() == 1);
    REQUIRE(fitted.cols() == 1);
    CHECK(fitted(0, 0) == Catch::Approx(2.0));
  }

  SECTION("no perturbation improves the residual") {
    std::vector<std::pair<Vec, Vec>> pairs;
    for (int i = 0; i < 5; ++i) {
      pairs.emplace_back(random_matrix(rng, 3, 1).col(0),
                         random_matrix(rng, 2, 1).col(0));
    }
    const Mat fitted = fit_map_least_squares(pairs);
    const auto residual = [&pairs](const Mat& m) {
      double r = 0.0;
      for (const auto& [x, y] : pairs) r += (m * x - y).squaredNorm();
      return r;
    };
    const double base = residual(fitted);
    for (int k = 0; k < 200; ++k) {
      const Mat perturbed = fitted + 1e-3 * random_matrix(rng, 2, 3);
      CHECK(residual(perturbed) >= base - 1e-12);
    }
  }
}

TEST_CASE("generalized eigenpairs closed forms", "[linalg][eig]") {
  const auto identity_pairs =
      generalized_eigenpairs(Mat::Identity(2, 2), Mat::Identity(2, 2));
  REQUIRE(identity_pairs.size() == 2);
  CHECK(identity_pairs[0].first == Catch::Approx(1.0));
  CHECK(identity_pairs[1].first == Catch::Approx(1.0));

  // Pulled-back diagonal form diag(0.36, 1.96) against the identity: the
  // spectrum is the diagonal and the eigenvectors are the axes.
  Mat b = Mat::Zero(2, 2);
  b(0, 0) = 0.36;
  b(1, 1) = 1.96;
  const auto pairs = generalized_eigenpairs(Mat::Identity(2, 2), b);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].first == Catch::Approx(0.36));
  CHECK(pairs[1].first == Catch::Approx(1.96));
  CHECK(std::abs(pairs[0].second(0)) == Catch::Approx(1.0));
  CHECK(std::abs(pairs[1].second(1)) == Catch::Approx(1.0));

  const auto scaled =
      generalized_eigenpairs(Mat::Identity(3, 3), 2.0 * Mat::Identity(3, 3));
  for (const auto& [lambda, e] : scaled) CHECK(lambda == Catch::Approx(2.0));
}

TEST_CASE("generalized eigenpairs input validation", "[linalg][eig]") {
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 1e-3;
  CHECK_THROWS_AS(generalized_eigenpairs(asym, Mat::Identity(2, 2)),
                  vsdyn::NotSymmetric);
  Mat indef = Mat::Identity(2, 2);
  indef(1, 1) = -1.0;
  CHECK_THROWS_AS(generalized_eigenpairs(indef, Mat::Identity(2, 2)),
                  vsdyn::NotPositiveDefinite);
  CHECK_THROWS_AS(
      generalized_eigenpairs(Mat::Identity(2, 2), Mat::Identity(3, 3)),
      vsdyn::DimensionMismatch);
}

TEST_CASE("generalized eigenpairs reconstruct and A-orthonormalize",
          "[linalg][eig][property]") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<int> dim_dist(1, 6);
    const int n = dim_dist(rng);
    const Mat a = random_spd(rng, n);
    const Mat b = random_spd(rng, n);
    const auto pairs = generalized_eigenpairs(a, b);
    REQUIRE(static_cast<int>(pairs.size()) == n);

    Mat e(n, n);
    Vec lambda(n);
    for (int i = 0; i < n; ++i) {
      lambda(i) = pairs[i].first;
      e.col(i) = pairs[i].second;
      CHECK(pairs[i].first > 0.0);
      if (i > 0) CHECK(pairs[i].first >= pairs[i - 1].first);
    }
    // A-orthonormality: E^T A E = I.
    CHECK((e.transpose() * a * e - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <
          1e-8);
    // Reconstruction: B = A E Lambda E^T A.
    const Mat rebuilt = a * e * lambda.asDiagonal() * e.transpose() * a;
    CHECK((rebuilt - b).cwiseAbs().maxCoeff() <
          1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff()));
    // Definition: B e_i = lambda_i A e_i.
    for (int i = 0; i < n; ++i) {
      CHECK((b * e.col(i) - lambda(i) * a * e.col(i)).norm() < 1e-7);
    }
  }
}
