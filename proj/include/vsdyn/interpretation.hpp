#pragma once
// Interpretation maps between agents' value spaces: application, path
// composition, blindness (null-space) tests, pairwise consistency checks, the
// round-trip deviation bound, persuasion matrices, and map fitting from
// examples.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/agents.hpp"
#include "vsdyn/errors.hpp"
#include "vsdyn/linalg.hpp"

namespace vsdyn {

// A linear translation from `source`'s value space to `target`'s:
// matrix is (target dim) x (source dim).
struct InterpretationMap {
  std::string source;
  std::string target;
  Mat matrix;
};

// Applies the map to a source-space vector.
inline Vec apply(const InterpretationMap& m, const Vec& x) {
  if (m.matrix.cols() != x.size()) {
    throw DimensionMismatch("apply: map expects dimension " +
                            std::to_string(m.matrix.cols()) + ", got " +
                            std::to_string(x.size()));
  }
  return m.matrix * x;
}

// Composes a chain of maps in application order (first element applied
// first). Adjacent maps must share an endpoint and compatible shapes; the
// result runs from the first map's source to the last map's target.
inline InterpretationMap compose_path(
    const std::vector<InterpretationMap>& maps) {
  if (maps.empty()) {
    throw BrokenChain("compose_path: empty path");
  }
  for (std::size_t i = 0; i + 1 < maps.size(); ++i) {
    if (maps[i].target != maps[i + 1].source) {
      throw BrokenChain("compose_path: map " + std::to_string(i) +
                        " ends at '" + maps[i].target + "' but map " +
                        std::to_string(i + 1) + " starts at '" +
                        maps[i + 1].source + "'");
    }
    if (maps[i].matrix.rows() != maps[i + 1].matrix.cols()) {
      throw DimensionMismatch("compose_path: shape break between maps " +
                              std::to_string(i) + " and " +
                              std::to_string(i + 1));
    }
  }
  InterpretationMap out;
  out.source = maps.front().source;
  out.target = maps.back().target;
  out.matrix = maps.front().matrix;
  for (std::size_t i = 1; i < maps.size(); ++i) {
    out.matrix = maps[i].matrix * out.matrix;
  }
  return out;
}

// Cognitive blindness: the map annihilates the vector (image norm at or below
// the map's rank threshold).
inline bool is_blind_to(const InterpretationMap& m, const Vec& v,
                        const TolerancePolicy& tol = {}) {
  return apply(m, v).norm() <= rank_threshold(m.matrix, tol);
}

// How the forward leg of check_consistency was judged: against the input
// vector itself (round-trip premise style) or against a supplied target
// representation.
enum class ConsistencyMode { TheoremPremise, SuppliedTarget };

struct ConsistencyReport {
  ConsistencyMode mode = ConsistencyMode::TheoremPremise;
  bool forward_ok = false;
  bool backward_ok = false;
  bool valuation_ok = false;
  double forward_dev = 0.0;    // ||T_ab(x) - reference||
  double backward_dev = 0.0;   // ||T_ba(T_ab(x)) - x||
  double valuation_gap = 0.0;  // |Val_b(T_ab(x)) - Val_a(x)|
  bool consistent() const { return forward_ok && backward_ok && valuation_ok; }
};

namespace detail {

inline ConsistencyReport check_consistency_impl(
    const InterpretationMap& map_ab, const InterpretationMap& map_ba,
    const Vec& x, double eps, double delta, const ValuationFunction& val_a,
    const ValuationFunction& val_b, const Vec* expected) {
  ConsistencyReport rep;
  const Vec image = apply(map_ab, x);
  const double scale = x.norm();
  if (expected != nullptr) {
    rep.mode = ConsistencyMode::SuppliedTarget;
    detail::require_same_size(image, *expected, "check_consistency expected");
    rep.forward_dev = (image - *expected).norm();
  } else {
    rep.mode = ConsistencyMode::TheoremPremise;
    detail::require_same_size(image, x, "check_consistency forward");
    rep.forward_dev = (image - x).norm();
  }
  rep.forward_ok = rep.forward_dev <= eps * scale;
  const Vec back = apply(map_ba, image);
  detail::require_same_size(back, x, "check_consistency backward");
  rep.backward_dev = (back - x).norm();
  rep.backward_ok = rep.backward_dev <= eps * scale;
  rep.valuation_gap = std::abs(val_b(image) - val_a(x));
  rep.valuation_ok = rep.valuation_gap <= delta;
  return rep;
}

}  // namespace detail

// Checks forward consistency (image stays within eps * ||x|| of x), backward
// consistency (round trip returns within eps * ||x||), and valuation
// agreement (|Val_b(image) - Val_a(x)| <= delta).
inline ConsistencyReport check_consistency(const InterpretationMap& map_ab,
                                           const InterpretationMap& map_ba,
                                           const Vec& x, double eps,
                                           double delta,
                                           const ValuationFunction& val_a,
                                           const ValuationFunction& val_b) {
  return detail::check_consistency_impl(map_ab, map_ba, x, eps, delta, val_a,
                                        val_b, nullptr);
}

// Variant judging the forward leg against a supplied target representation
// instead of against x itself (the spaces need not share a dimension).
inline ConsistencyReport check_consistency(
    const InterpretationMap& map_ab, const InterpretationMap& map_ba,
    const Vec& x, const Vec& expected, double eps, double delta,
    const ValuationFunction& val_a, const ValuationFunction& val_b) {
  return detail::check_consistency_impl(map_ab, map_ba, x, eps, delta, val_a,
                                        val_b, &expected);
}

// Result of the k-step round-trip deviation bound for R = T_ba . T_ab.
// When both legs are eps-consistent on every iterate visited, the deviation
// after k round trips obeys
//   ||R^k(x) - x|| <= ((1 + 2 eps + eps^2)^k - 1) ||x||.
struct RoundTripReport {
  bool applicable = false;  // premises held on every iterate checked
  double eps = 0.0;
  int k = 1;
  double observed = 0.0;        // ||R^k(x) - x||
  double one_step_bound = 0.0;  // (2 eps + eps^2) ||x||
  double k_step_bound = 0.0;    // ((1 + 2 eps + eps^2)^k - 1) ||x||
  bool holds = false;           // applicable and observed <= k_step_bound
};

// Verifies the premises on each iterate R^s(x) (forward deviation within
// eps * norm, backward deviation within eps * image norm) and compares the
// observed k-step deviation with the closed-form bound. If a premise fails,
// the report is flagged not applicable and no bound is asserted.
inline RoundTripReport round_trip_bound(const InterpretationMap& map_ab,
                                        const InterpretationMap& map_ba,
                                        const Vec& x, double eps, int k = 1) {
  if (k < 1) throw BadParameter("round_trip_bound: k must be >= 1");
  if (eps < 0.0) throw BadParameter("round_trip_bound: eps must be >= 0");
  RoundTripReport rep;
  rep.eps = eps;
  rep.k = k;
  const double base = 2.0 * eps + eps * eps;
  rep.one_step_bound = base * x.norm();
  rep.k_step_bound = (std::pow(1.0 + base, k) - 1.0) * x.norm();

  // Relative slack so an eps computed as the exact max deviation ratio is not
  // rejected by the last bit of round-off.
  const double slack = 1.0 + 1e-12;
  rep.applicable = true;
  Vec u = x;
  for (int s = 0; s < k; ++s) {
    const Vec image = apply(map_ab, u);
    detail::require_same_size(image, u, "round_trip_bound");
    if ((image - u).norm() > eps * u.norm() * slack) {
      rep.applicable = false;
      break;
    }
    const Vec back = apply(map_ba, image);
    detail::require_same_size(back, u, "round_trip_bound");
    if ((back - image).norm() > eps * image.norm() * slack) {
      rep.applicable = false;
      break;
    }
    u = back;
  }
  if (rep.applicable) {
    rep.observed = (u - x).norm();
    rep.holds = rep.observed <= rep.k_step_bound * slack + 1e-15;
  }
  return rep;
}

// Persuasion: a post-interpretation adjustment M with Val(M T_a(x)) = target.
// The canonical solution is the uniform scalar matrix c * I with
// c = target / Val(T_a(x)); any diagonal solution scaling every coordinate by
// that same factor coincides with it. Requires a Norm-kind valuation.
inline Mat persuasion_matrix(const InterpretationMap& map_a, const Vec& x,
                             double target_val, const ValuationFunction& val,
                             const TolerancePolicy& tol = {}) {
  if (val.kind != ValuationKind::Norm) {
    throw BadValuationKind("persuasion_matrix: valuation must be Norm-kind");
  }
  if (target_val < 0.0) {
    throw BadParameter("persuasion_matrix: target valuation must be >= 0");
  }
  const Vec image = apply(map_a, x);
  const double current = val(image);
  if (current <= existence_threshold(tol)) {
    throw ZeroImage("persuasion_matrix: map annihilates the input");
  }
  const double c = target_val / current;
  return c * Mat::Identity(image.size(), image.size());
}

// Fits an interpretation map between two named agents from (source, target)
// example pairs by least squares.
inline InterpretationMap fit_interpretation_map(
    const std::string& source, const std::string& target,
    const std::vector<std::pair<Vec, Vec>>& pairs,
    const TolerancePolicy& tol = {}) {
  InterpretationMap m;
  m.source = source;
  m.target = target;
  m.matrix = fit_map_least_squares(pairs, tol);
  return m;
}

}  // namespace vsdyn
