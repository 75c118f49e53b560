#pragma once
// Dense linear-algebra kernel: tolerance policy, SVD-based rank / null space /
// pseudo-inverse, cosine similarity, convex-hull membership via a phase-1
// simplex feasibility solve, least-squares map fitting, and a
// symmetric-definite generalized eigensolver.
//
// All cutoffs that decide "is this numerically zero" flow through the
// TolerancePolicy so the whole engine agrees on what counts as annihilation.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/errors.hpp"

namespace vsdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Central numeric knobs. `rank_tol_factor` scales the machine-epsilon rank
// cutoff, `hull_tol` bounds the convex-hull feasibility residual, and
// `example_tol` is the default comparison band for worked-example goldens.
struct TolerancePolicy {
  double rank_tol_factor = 1e2;
  double hull_tol = 1e-9;
  double example_tol = 5e-3;
};

// Norm cutoff below which a representation vector is treated as absent.
// Representations are unit-scale objects, so the cutoff anchors to scale 1.
inline double existence_threshold(const TolerancePolicy& tol = {}) {
  return tol.rank_tol_factor * std::numeric_limits<double>::epsilon();
}

namespace detail {

// Singular-value cutoff for a matrix with leading singular value `sigma_max`:
// rank_tol_factor * eps * sigma_max * max(rows, cols).
inline double rank_cutoff(double sigma_max, Eigen::Index rows,
                          Eigen::Index cols, const TolerancePolicy& tol) {
  return tol.rank_tol_factor * std::numeric_limits<double>::epsilon() *
         sigma_max * static_cast<double>(std::max(rows, cols));
}

inline void require_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(what) + ": sizes " +
                            std::to_string(a.size()) + " and " +
                            std::to_string(b.size()) + " differ");
  }
}

// Throws unless `m` is square, symmetric within 1e-10 and positive definite
// (checked by Cholesky).
inline void require_spd(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix is not square");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw NotSymmetric(std::string(what) + ": matrix is not symmetric");
  }
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite(std::string(what) +
                              ": matrix is not positive definite");
  }
}

}  // namespace detail

// Singular-value threshold used by rank decisions for `m`.
inline double rank_threshold(const Mat& m, const TolerancePolicy& tol = {}) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  const double sigma_max =
      svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return detail::rank_cutoff(sigma_max, m.rows(), m.cols(), tol);
}

// Numerical rank: number of singular values above the rank threshold.
inline int rank(const Mat& m, const TolerancePolicy& tol = {}) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  const double cutoff =
      detail::rank_cutoff(sv.size() > 0 ? sv(0) : 0.0, m.rows(), m.cols(), tol);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++r;
  }
  return r;
}

// Orthonormal basis of the (right) null space: the trailing right singular
// vectors. Returns cols - rank vectors, each satisfying ||m * v|| <= cutoff.
inline std::vector<Vec> null_space_basis(const Mat& m,
                                         const TolerancePolicy& tol = {}) {
  if (m.cols() == 0) return {};
  if (m.rows() == 0) {
    // Every direction is annihilated by a map with no output coordinates.
    std::vector<Vec> basis;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      Vec e = Vec::Zero(m.cols());
      e(j) = 1.0;
      basis.push_back(std::move(e));
    }
    return basis;
  }
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff =
      detail::rank_cutoff(sv.size() > 0 ? sv(0) : 0.0, m.rows(), m.cols(), tol);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++r;
  }
  std::vector<Vec> basis;
  for (Eigen::Index j = r; j < m.cols(); ++j) {
    basis.push_back(svd.matrixV().col(j));
  }
  return basis;
}

// Moore-Penrose pseudo-inverse via SVD with the shared rank cutoff.
inline Mat pseudo_inverse(const Mat& m, const TolerancePolicy& tol = {}) {
  if (m.rows() == 0 || m.cols() == 0) return Mat::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff =
      detail::rank_cutoff(sv.size() > 0 ? sv(0) : 0.0, m.rows(), m.cols(), tol);
  Vec inv = Vec::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// cos of the angle between two nonzero vectors of equal dimension.
inline double cosine_similarity(const Vec& a, const Vec& b) {
  detail::require_same_size(a, b, "cosine_similarity");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw ZeroVector("cosine_similarity: zero-norm input");
  }
  return a.dot(b) / (na * nb);
}

// Outcome of a convex-hull membership query. When `inside` is true,
// `coefficients` holds convex weights (nonnegative, summing to one) that
// reproduce the query point within hull_tol.
struct HullMembership {
  bool inside = false;
  std::vector<double> coefficients;
};

namespace detail {

// Phase-1 simplex with Bland's rule on the standard-form system
//   [V; 1^T] a = [x; 1],  a >= 0,
// minimizing the sum of artificial variables. Feasibility at hull_tol decides
// membership. Dense tableau; problem sizes here are tiny (desk scale).
inline HullMembership hull_lp(const Vec& x, const std::vector<Vec>& vertices,
                              const TolerancePolicy& tol) {
  const Eigen::Index d = x.size();
  const std::size_t k = vertices.size();
  const Eigen::Index m = d + 1;                 // constraint rows
  const Eigen::Index n = static_cast<Eigen::Index>(k) + m;  // vars + artificials

  // Tableau: m rows of [A | b], plus we track the phase-1 reduced-cost row.
  Mat a(m, n);
  Vec b(m);
  a.setZero();
  for (std::size_t j = 0; j < k; ++j) {
    a.col(static_cast<Eigen::Index>(j)).head(d) = vertices[j];
    a(d, static_cast<Eigen::Index>(j)) = 1.0;
  }
  b.head(d) = x;
  b(d) = 1.0;
  // Flip rows with negative right-hand side so b >= 0, then seed the identity
  // basis with artificials.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b(i) < 0.0) {
      a.row(i) = -a.row(i);
      b(i) = -b(i);
    }
    a(i, static_cast<Eigen::Index>(k) + i) = 1.0;
  }
  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = static_cast<Eigen::Index>(k) + i;

  // Phase-1 reduced costs: r_j = c_j - sum_i a_ij over artificial-cost basis.
  Vec r(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c_j = (j >= static_cast<Eigen::Index>(k)) ? 1.0 : 0.0;
    r(j) = c_j - a.col(j).sum();
  }
  double objective = b.sum();  // current sum of artificials

  const double pivot_eps = 1e-12;
  const Eigen::Index max_pivots = 8 * (n + m) * (n + m) + 64;
  for (Eigen::Index pivots = 0; pivots < max_pivots; ++pivots) {
    // Bland: entering variable = smallest index with negative reduced cost.
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (r(j) < -pivot_eps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;  // optimal
    // Ratio test; Bland tie-break on the smallest basis variable index.
    Eigen::Index leave_row = -1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (a(i, enter) > pivot_eps) {
        const double ratio = b(i) / a(i, enter);
        if (leave_row < 0 || ratio < best_ratio - pivot_eps ||
            (std::abs(ratio - best_ratio) <= pivot_eps &&
             basis[i] < basis[leave_row])) {
          leave_row = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave_row < 0) break;  // unbounded cannot happen in phase 1; stop safe
    // Pivot.
    const double piv = a(leave_row, enter);
    a.row(leave_row) /= piv;
    b(leave_row) /= piv;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != leave_row && a(i, enter) != 0.0) {
        const double f = a(i, enter);
        a.row(i) -= f * a.row(leave_row);
        b(i) -= f * b(leave_row);
      }
    }
    const double rf = r(enter);
    r -= rf * a.row(leave_row).transpose();
    basis[leave_row] = enter;
    // Recompute the artificial mass directly; m is tiny and this is exact.
    objective = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (basis[i] >= static_cast<Eigen::Index>(k)) objective += b(i);
    }
  }

  HullMembership result;
  if (objective > tol.hull_tol) {
    result.inside = false;
    return result;
  }
  result.inside = true;
  result.coefficients.assign(k, 0.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[i] < static_cast<Eigen::Index>(k)) {
      result.coefficients[static_cast<std::size_t>(basis[i])] =
          std::max(0.0, b(i));
    }
  }
  // Normalize away pivot round-off so the weights sum to exactly one.
  double total = 0.0;
  for (double c : result.coefficients) total += c;
  if (total > 0.0) {
    for (double& c : result.coefficients) c /= total;
  }
  return result;
}

}  // namespace detail

// Tests whether `x` lies in the convex hull of `vertices` (all of x's
// dimension). INSIDE comes with certifying convex coefficients; OUTSIDE
// certifies infeasibility of the hull LP at hull_tol.
inline HullMembership convex_hull_membership(const Vec& x,
                                             const std::vector<Vec>& vertices,
                                             const TolerancePolicy& tol = {}) {
  if (vertices.empty()) {
    throw DimensionMismatch("convex_hull_membership: empty vertex set");
  }
  for (const Vec& v : vertices) {
    detail::require_same_size(x, v, "convex_hull_membership");
  }
  return detail::hull_lp(x, vertices, tol);
}

// Least-squares fit of a linear map sending each pair's first element to its
// second: minimizes the summed squared residual, and among minimizers returns
// the one of minimum Frobenius norm (via the pseudo-inverse).
inline Mat fit_map_least_squares(
    const std::vector<std::pair<Vec, Vec>>& pairs,
    const TolerancePolicy& tol = {}) {
  if (pairs.empty()) {
    throw DimensionMismatch("fit_map_least_squares: no sample pairs");
  }
  const Eigen::Index s = pairs.front().first.size();
  const Eigen::Index t = pairs.front().second.size();
  Mat u(s, static_cast<Eigen::Index>(pairs.size()));
  Mat w(t, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first.size() != s || pairs[i].second.size() != t) {
      throw DimensionMismatch(
          "fit_map_least_squares: inconsistent pair dimensions");
    }
    u.col(static_cast<Eigen::Index>(i)) = pairs[i].first;
    w.col(static_cast<Eigen::Index>(i)) = pairs[i].second;
  }
  return w * pseudo_inverse(u, tol);
}

// Solves the symmetric-definite generalized problem B e = lambda A e for SPD
// A and B. Returns (eigenvalue, eigenvector) pairs in ascending eigenvalue
// order with A-orthonormal eigenvectors (e_i^T A e_j = delta_ij), so
// B = A E Lambda E^T A. Implemented by Cholesky reduction of A followed by a
// symmetric eigendecomposition.
inline std::vector<std::pair<double, Vec>> generalized_eigenpairs(
    const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("generalized_eigenpairs: shape mismatch");
  }
  detail::require_spd(a, "generalized_eigenpairs(A)");
  detail::require_spd(b, "generalized_eigenpairs(B)");
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(
      b, a, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw NotPositiveDefinite(
        "generalized_eigenpairs: reduction failed (matrix not definite?)");
  }
  std::vector<std::pair<double, Vec>> pairs;
  pairs.reserve(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    pairs.emplace_back(solver.eigenvalues()(i), solver.eigenvectors().col(i));
  }
  return pairs;
}

}  // namespace vsdyn
