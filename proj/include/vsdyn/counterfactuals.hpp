#pragma once
// Counterfactual geometry: displacement vectors, their images under
// interpretation maps, constrained counterfactual subspaces, quadratic
// plausibility costs, and the perspective-distortion search for preference
// reversals between two agents' cost metrics.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/errors.hpp"
#include "vsdyn/interpretation.hpp"
#include "vsdyn/linalg.hpp"

namespace vsdyn {

// The counterfactual displacement from an actual state to a hypothetical one.
inline Vec displacement(const Vec& actual, const Vec& hypothetical) {
  detail::require_same_size(actual, hypothetical, "displacement");
  return hypothetical - actual;
}

// The same displacement as seen through another agent's interpretation map:
// T(hypothetical - actual).
inline Vec perspective_displacement(const InterpretationMap& m,
                                    const Vec& actual,
                                    const Vec& hypothetical) {
  return apply(m, displacement(actual, hypothetical));
}

// An axis-aligned affine subspace of counterfactuals: some coordinates pinned
// to fixed values, the rest free. `basis` spans the free directions
// (orthonormal by construction).
struct AffineSubspace {
  Vec offset;
  std::vector<Vec> basis;
};

// Builds the counterfactual subspace of a `dim`-dimensional space with the
// given (index, value) coordinates held fixed.
inline AffineSubspace constrain_subspace(
    int dim, const std::vector<std::pair<int, double>>& fixed) {
  if (dim < 1) throw BadParameter("constrain_subspace: dim must be >= 1");
  AffineSubspace out;
  out.offset = Vec::Zero(dim);
  std::set<int> pinned;
  for (const auto& [index, value] : fixed) {
    if (index < 0 || index >= dim) {
      throw BadIndex("constrain_subspace: index " + std::to_string(index) +
                     " out of range for dimension " + std::to_string(dim));
    }
    if (!pinned.insert(index).second) {
      throw BadIndex("constrain_subspace: index " + std::to_string(index) +
                     " fixed twice");
    }
    out.offset(index) = value;
  }
  for (int j = 0; j < dim; ++j) {
    if (pinned.count(j)) continue;
    Vec e = Vec::Zero(dim);
    e(j) = 1.0;
    out.basis.push_back(std::move(e));
  }
  return out;
}

// Quadratic plausibility cost of a displacement under an SPD metric:
// delta^T W delta.
inline double counterfactual_cost(const Vec& delta, const Mat& metric) {
  detail::require_spd(metric, "counterfactual_cost metric");
  if (metric.cols() != delta.size()) {
    throw DimensionMismatch("counterfactual_cost: metric does not match delta");
  }
  return delta.dot(metric * delta);
}

enum class ReversalVerdict { Proportional, WitnessFound };

// A pair of counterfactuals on which the two agents' cost orderings disagree:
// agent i finds x cheaper than y while agent j (through its map) finds y
// cheaper than x, each strictly.
struct ReversalWitness {
  Vec x;
  Vec y;
  double cost_i_x = 0.0;
  double cost_i_y = 0.0;
  double cost_j_x = 0.0;
  double cost_j_y = 0.0;
};

struct ReversalResult {
  ReversalVerdict verdict = ReversalVerdict::Proportional;
  std::vector<double> eigenvalues;  // generalized spectrum, ascending
  std::optional<ReversalWitness> witness;
};

// Searches for a preference reversal between agent i's cost form
// Q_i(d) = d^T W_i d and agent j's pulled-back form
// Q_j(d) = (T d)^T W_j (T d) around the shared actual state c. The forms are
// compared through the generalized eigenproblem Q_j e = lambda Q_i e; if all
// eigenvalues agree within `tol` (relative spread) the forms are proportional
// and no reversal exists. Otherwise a witness is built from the extreme
// eigenvectors: x = c + t * e_max and y = c + t * (1 + delta) * e_min with
// delta = min(0.5 * (sqrt(l_max / l_min) - 1), 0.25) and t chosen so both
// strict margins clear 1e-6.
inline ReversalResult find_preference_reversal(const Mat& metric_i,
                                               const InterpretationMap& map_ij,
                                               const Mat& metric_j,
                                               const Vec& c,
                                               double tol = 1e-6) {
  detail::require_spd(metric_i, "find_preference_reversal metric_i");
  detail::require_spd(metric_j, "find_preference_reversal metric_j");
  if (map_ij.matrix.cols() != metric_i.cols()) {
    throw DimensionMismatch(
        "find_preference_reversal: map domain does not match metric_i");
  }
  if (map_ij.matrix.rows() != metric_j.cols()) {
    throw DimensionMismatch(
        "find_preference_reversal: map codomain does not match metric_j");
  }
  if (c.size() != metric_i.cols()) {
    throw DimensionMismatch(
        "find_preference_reversal: c does not match metric_i");
  }
  if (rank(map_ij.matrix) < map_ij.matrix.cols()) {
    throw NotInjective(
        "find_preference_reversal: interpretation map is not injective");
  }

  const Mat pulled_raw =
      map_ij.matrix.transpose() * metric_j * map_ij.matrix;
  // Symmetrize away round-off before the definite eigensolve.
  const Mat pulled = 0.5 * (pulled_raw + pulled_raw.transpose());
  const auto pairs = generalized_eigenpairs(metric_i, pulled);

  ReversalResult result;
  for (const auto& [lambda, e] : pairs) result.eigenvalues.push_back(lambda);
  const double l_min = result.eigenvalues.front();
  const double l_max = result.eigenvalues.back();
  if (l_max / l_min - 1.0 <= tol) {
    result.verdict = ReversalVerdict::Proportional;
    return result;
  }

  result.verdict = ReversalVerdict::WitnessFound;
  const double delta =
      std::min(0.5 * (std::sqrt(l_max / l_min) - 1.0), 0.25);
  Vec u = pairs.back().second;          // Q_i(u) = 1, Q_j(u) = l_max
  Vec w = (1.0 + delta) * pairs.front().second;
  // Margins scale with t^2; inflate the witness until both clear 1e-6.
  const double margin_i = (1.0 + delta) * (1.0 + delta) - 1.0;
  const double margin_j = l_max - (1.0 + delta) * (1.0 + delta) * l_min;
  const double t2 = std::max({1.0, 1e-6 / margin_i, 1e-6 / margin_j});
  const double t = std::sqrt(t2);
  u *= t;
  w *= t;

  ReversalWitness witness;
  witness.x = c + u;
  witness.y = c + w;
  witness.cost_i_x = u.dot(metric_i * u);
  witness.cost_i_y = w.dot(metric_i * w);
  witness.cost_j_x = u.dot(pulled * u);
  witness.cost_j_y = w.dot(pulled * w);
  if (!(witness.cost_i_x + 1e-9 < witness.cost_i_y) ||
      !(witness.cost_j_y + 1e-9 < witness.cost_j_x)) {
    throw Error("find_preference_reversal: witness margins degenerate");
  }
  result.witness = witness;
  return result;
}

}  // namespace vsdyn
