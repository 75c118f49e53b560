#pragma once
// Applied group analyses: candidate scoring and leader election, deviance
// (black-sheep) reports, in-group / out-group valuation contrast, marketing
// interventions that extend a value space by a new axis, and the rage /
// sadness emotion classifier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/agents.hpp"
#include "vsdyn/errors.hpp"
#include "vsdyn/interpretation.hpp"
#include "vsdyn/linalg.hpp"

namespace vsdyn {

// Cross-interpretation lookup: maps a (subject, follower) pair to the
// interpretation map used when the follower reads the subject's stance.
using CrossMaps =
    std::map<std::pair<std::string, std::string>, InterpretationMap>;

// Mean valuation of a candidate's stance across followers, each follower
// reading it through its own cross map: S = mean_j Val_j(T_{c->j}(stance)).
inline double group_score(
    const std::string& candidate, const Vec& stance,
    const std::vector<std::string>& followers,
    const std::map<std::string, ValuationFunction>& valuations,
    const CrossMaps& cross_maps) {
  if (followers.empty()) {
    throw NoCandidates("group_score: follower list is empty");
  }
  double total = 0.0;
  for (const std::string& follower : followers) {
    const auto map_it = cross_maps.find({candidate, follower});
    if (map_it == cross_maps.end()) {
      throw MissingMap("group_score: no map from '" + candidate + "' to '" +
                       follower + "'");
    }
    const auto val_it = valuations.find(follower);
    if (val_it == valuations.end()) {
      throw MissingMap("group_score: follower '" + follower +
                       "' has no valuation");
    }
    total += val_it->second(apply(map_it->second, stance));
  }
  return total / static_cast<double>(followers.size());
}

struct CandidateScore {
  std::string id;
  double score = 0.0;
};

// Elects the candidate with the highest group score; ties break toward the
// lexicographically smaller id. Optionally reports every candidate's score.
inline std::string elect_leader(
    const std::vector<std::pair<std::string, Vec>>& candidates,
    const std::vector<std::string>& followers,
    const std::map<std::string, ValuationFunction>& valuations,
    const CrossMaps& cross_maps,
    std::vector<CandidateScore>* scores_out = nullptr) {
  if (candidates.empty()) {
    throw NoCandidates("elect_leader: no candidates");
  }
  std::string best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& [id, stance] : candidates) {
    const double s =
        group_score(id, stance, followers, valuations, cross_maps);
    if (scores_out != nullptr) scores_out->push_back({id, s});
    if (s > best_score || (s == best_score && (best.empty() || id < best))) {
      best = id;
      best_score = s;
    }
  }
  return best;
}

// Deviance of a member from the group prototype, measured in group space.
struct DevianceReport {
  Vec in_group_view;         // member stance mapped into group space
  double distance = 0.0;     // ||view - prototype||
  double reward = 0.0;       // exp(-distance)
  double punishment = 0.0;   // distance
};

inline DevianceReport deviance_report(const Vec& stance,
                                      const InterpretationMap& group_map,
                                      const Vec& prototype) {
  DevianceReport report;
  report.in_group_view = apply(group_map, stance);
  detail::require_same_size(report.in_group_view, prototype,
                            "deviance_report prototype");
  report.distance = (report.in_group_view - prototype).norm();
  report.reward = std::exp(-report.distance);
  report.punishment = report.distance;
  return report;
}

struct OutgroupContrast {
  double in_val = 0.0;   // follower's valuation of in-group content
  double out_val = 0.0;  // follower's valuation of out-group content
  double ratio = 0.0;    // out / in
  bool out_group = false;  // ratio below threshold
  std::string warning;
};

// Contrast a follower's valuation of in-group content against out-group
// content, each read through its interpretation map. The out-group flag fires
// when out / in falls below `ratio_threshold`; a nonpositive in-group
// valuation makes the ratio meaningless and is reported as a warning.
inline OutgroupContrast outgroup_contrast(const ValuationFunction& val,
                                          const InterpretationMap& in_map,
                                          const Vec& in_stance,
                                          const InterpretationMap& out_map,
                                          const Vec& out_stance,
                                          double ratio_threshold = 0.5) {
  OutgroupContrast contrast;
  contrast.in_val = val(apply(in_map, in_stance));
  contrast.out_val = val(apply(out_map, out_stance));
  if (contrast.in_val <= 0.0) {
    contrast.ratio = std::numeric_limits<double>::quiet_NaN();
    contrast.warning =
        "in-group valuation is not positive; contrast ratio undefined";
    return contrast;
  }
  contrast.ratio = contrast.out_val / contrast.in_val;
  contrast.out_group = contrast.ratio < ratio_threshold;
  return contrast;
}

struct MarketingReport {
  Agent agent_after;           // value space extended by the new axis
  double val_before = 0.0;     // valuation of the product pre-intervention
  double val_after = 0.0;      // valuation post-intervention
  Vec gradient_before;         // motivational gradient, embedded
  Vec gradient_after;          // gradient after the goal gains the new axis
  double cos_before = 0.0;     // cosine of gradient vs product
  double cos_after = 0.0;
};

// Marketing intervention: extends the agent's value space with a new labeled
// axis carrying valuation weight `weight`, and raises the goal by `eta` on
// that axis. The product is a vector of the extended space; the old
// coordinates of states and goals are untouched, so the valuation of the
// product changes by exactly weight * product[new axis]. Requires a
// WeightedSum or Linear valuation.
inline MarketingReport marketing_intervention(const Agent& a,
                                              const std::string& new_label,
                                              double weight, double eta,
                                              const Vec& product) {
  if (a.valuation.kind == ValuationKind::Norm) {
    throw BadValuationKind(
        "marketing_intervention: requires a WeightedSum or Linear valuation");
  }
  const int dim = a.space.dim;
  if (product.size() != dim + 1) {
    throw DimensionMismatch(
        "marketing_intervention: product must have dimension " +
        std::to_string(dim + 1));
  }
  for (const std::string& label : a.space.basis_labels) {
    if (label == new_label) {
      throw DuplicateAxisLabel("marketing_intervention: axis '" + new_label +
                               "' already exists");
    }
  }

  MarketingReport report;
  report.val_before = a.valuation(product.head(dim));

  Agent after = a;
  after.space.dim = dim + 1;
  after.space.basis_labels.push_back(new_label);
  after.valuation.weights.conservativeResize(dim + 1);
  after.valuation.weights(dim) = weight;
  after.current_state.conservativeResize(dim + 1);
  after.current_state(dim) = 0.0;
  after.goal_state.conservativeResize(dim + 1);
  after.goal_state(dim) = eta;

  report.val_after = after.valuation(product);
  report.gradient_before = Vec::Zero(dim + 1);
  report.gradient_before.head(dim) = a.goal_state - a.current_state;
  report.gradient_after = motivational_gradient(after);
  report.cos_before = cosine_similarity(report.gradient_before, product);
  report.cos_after = cosine_similarity(report.gradient_after, product);
  report.agent_after = std::move(after);
  return report;
}

enum class EmotionVerdict {
  NotActivatedReachable,
  NotActivatedSmallD,
  Rage,
  Sadness,
  Ambivalent
};

inline std::string to_string(EmotionVerdict v) {
  switch (v) {
    case EmotionVerdict::NotActivatedReachable:
      return "NOT_ACTIVATED(REACHABLE)";
    case EmotionVerdict::NotActivatedSmallD:
      return "NOT_ACTIVATED(SMALL_D)";
    case EmotionVerdict::Rage:
      return "RAGE";
    case EmotionVerdict::Sadness:
      return "SADNESS";
    case EmotionVerdict::Ambivalent:
      return "AMBIVALENT";
  }
  return "UNKNOWN";
}

struct EmotionInput {
  Vec x;                   // current state
  Vec g;                   // goal state
  Vec acceptance_axis;     // b_acc, the acceptance direction
  std::vector<Mat> actions;  // available transformations (square, dim x dim)
  int search_depth = 4;
  double gamma = 0.01;     // sadness gradient scale
  double beta = 1.0;       // rage gradient scale
  double activation_threshold_factor = 0.1;  // D <= factor * ||g|| is small
};

struct EmotionReport {
  EmotionVerdict verdict = EmotionVerdict::Ambivalent;
  double distance = 0.0;   // D = ||g - x||
  double acceptance = 0.0; // A = <x, b_acc>
  Vec gradient;            // resulting motivational pressure
};

namespace detail {

// Bounded-depth reachability: does some composition of at most `depth`
// actions (including the empty composition) map x within tol of g?
inline bool goal_reachable(const Vec& x, const Vec& g,
                           const std::vector<Mat>& actions, int depth,
                           double tol) {
  std::vector<Vec> frontier{x};
  if ((x - g).norm() <= tol) return true;
  // Breadth-first over composition length; desk-scale repertoires keep the
  // frontier tiny, and the cap guards accidental blowups.
  constexpr std::size_t kMaxStates = 2'000'000;
  for (int level = 0; level < depth; ++level) {
    std::vector<Vec> next;
    next.reserve(frontier.size() * std::max<std::size_t>(actions.size(), 1));
    for (const Vec& state : frontier) {
      for (const Mat& action : actions) {
        if (action.cols() != state.size()) {
          throw DimensionMismatch(
              "classify_emotion: action shape does not match the space");
        }
        Vec moved = action * state;
        if ((moved - g).norm() <= tol) return true;
        next.push_back(std::move(moved));
        if (next.size() > kMaxStates) {
          throw BadParameter(
              "classify_emotion: reachability search exceeds state budget");
        }
      }
    }
    frontier = std::move(next);
  }
  return false;
}

}  // namespace detail

// Classifies the emotional response to a blocked goal. Order of precedence:
// a reachable goal or a small goal distance means no activation; otherwise
// the sign of the acceptance reading A = <x, b_acc> selects sadness (A > tol,
// gradient gamma * (g - x)), rage (A < -tol, gradient beta * (g - x)), or
// ambivalence (|A| <= tol, gradient at the midpoint scale).
inline EmotionReport classify_emotion(const EmotionInput& in,
                                      double tol = 1e-6) {
  detail::require_same_size(in.x, in.g, "classify_emotion states");
  detail::require_same_size(in.x, in.acceptance_axis,
                            "classify_emotion acceptance axis");
  if (in.search_depth < 0) {
    throw BadParameter("classify_emotion: search_depth must be >= 0");
  }
  EmotionReport report;
  report.distance = (in.g - in.x).norm();
  report.acceptance = in.x.dot(in.acceptance_axis);
  report.gradient = Vec::Zero(in.x.size());

  if (detail::goal_reachable(in.x, in.g, in.actions, in.search_depth, tol)) {
    report.verdict = EmotionVerdict::NotActivatedReachable;
    return report;
  }
  if (report.distance <= in.activation_threshold_factor * in.g.norm()) {
    report.verdict = EmotionVerdict::NotActivatedSmallD;
    return report;
  }
  const Vec direction = in.g - in.x;
  if (report.acceptance > tol) {
    report.verdict = EmotionVerdict::Sadness;
    report.gradient = in.gamma * direction;
  } else if (report.acceptance < -tol) {
    report.verdict = EmotionVerdict::Rage;
    report.gradient = in.beta * direction;
  } else {
    report.verdict = EmotionVerdict::Ambivalent;
    report.gradient = 0.5 * (in.gamma + in.beta) * direction;
  }
  return report;
}

}  // namespace vsdyn
