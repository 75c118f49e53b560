#pragma once
// Belief and motivation dynamics: goal updates from adopted content,
// motivational-convergence tracking, group coordination checks, scalar
// valuation convergence over influence graphs, convex-hull leadership
// classification, and being lifecycles (birth / evolution / death).

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/agents.hpp"
#include "vsdyn/errors.hpp"
#include "vsdyn/linalg.hpp"
#include "vsdyn/network.hpp"
#include "vsdyn/rng.hpp"

namespace vsdyn {

enum class GoalRuleKind { ConvexBlend, Additive };

// How adopted content reshapes a goal:
//  - ConvexBlend: g' = alpha * adopted + (1 - alpha) * g, alpha in [0, 1].
//  - Additive:    g' = g + beta(step) * adopted, beta > 0 per step.
struct GoalUpdateRule {
  GoalRuleKind kind = GoalRuleKind::ConvexBlend;
  double alpha = 0.5;
  std::function<double(int)> beta;
};

// Applies one goal update, returning the modified agent.
inline Agent update_goal(const Agent& a, const Vec& adopted,
                         const GoalUpdateRule& rule, int step = 1) {
  detail::require_same_size(a.goal_state, adopted, "update_goal");
  Agent out = a;
  switch (rule.kind) {
    case GoalRuleKind::ConvexBlend: {
      if (rule.alpha < 0.0 || rule.alpha > 1.0) {
        throw BadParameter("update_goal: alpha must lie in [0, 1]");
      }
      out.goal_state = rule.alpha * adopted + (1.0 - rule.alpha) * a.goal_state;
      return out;
    }
    case GoalRuleKind::Additive: {
      if (!rule.beta) {
        throw BadParameter("update_goal: additive rule needs a beta schedule");
      }
      const double b = rule.beta(step);
      if (!(b > 0.0)) {
        throw BadParameter("update_goal: beta(step) must be > 0");
      }
      out.goal_state = a.goal_state + b * adopted;
      return out;
    }
  }
  throw Error("update_goal: unknown rule kind");
}

// Tracks the direction of the motivational gradient under an additive goal
// with growing emphasis: at step k the gradient is
//   M(k) = (goal - current) + beta(k) * adopted[k-1],
// and the returned sequence holds cos(M(k), limit). As beta grows and the
// adopted content approaches `limit`, the cosine approaches 1. A zero M(k) is
// recorded as cosine 0 (direction undefined).
inline std::vector<double> track_motivational_convergence(
    const Agent& a, const std::vector<Vec>& adopted_sequence, const Vec& limit,
    const std::function<double(int)>& beta) {
  if (limit.norm() == 0.0) {
    throw ZeroVector("track_motivational_convergence: zero limit direction");
  }
  if (!beta) {
    throw BadParameter("track_motivational_convergence: missing beta");
  }
  const Vec base = motivational_gradient(a);
  std::vector<double> cosines;
  cosines.reserve(adopted_sequence.size());
  for (std::size_t i = 0; i < adopted_sequence.size(); ++i) {
    const int step = static_cast<int>(i) + 1;
    const double b = beta(step);
    if (!(b > 0.0)) {
      throw BadParameter("track_motivational_convergence: beta(step) <= 0");
    }
    detail::require_same_size(base, adopted_sequence[i],
                              "track_motivational_convergence");
    const Vec m = base + b * adopted_sequence[i];
    const double mn = m.norm();
    cosines.push_back(mn == 0.0 ? 0.0 : m.dot(limit) / (mn * limit.norm()));
  }
  return cosines;
}

struct CoordinationEntry {
  std::string id;
  Vec interpreted;
  double structural_dev = 0.0;  // ||x_i - x_leader||
  double valuation_gap = 0.0;   // |Val_i(x_i) - Val_i(x_leader)|
  bool structural_ok = false;
  bool valuation_ok = false;
};

struct CoordinationReport {
  std::vector<CoordinationEntry> entries;
  bool coordinated = false;  // every follower passed both tests
};

// Coordination check: each follower's interpreted leader content must stay
// within eps of the leader's content (strict) and its valuation of that
// content within delta of its valuation of the leader's content (strict).
inline CoordinationReport check_coordination(
    const std::vector<std::pair<Agent, Vec>>& followers, const Vec& x_leader,
    double eps, double delta) {
  CoordinationReport report;
  report.coordinated = true;
  for (const auto& [agent, interpreted] : followers) {
    detail::require_same_size(interpreted, x_leader, "check_coordination");
    CoordinationEntry e;
    e.id = agent.id;
    e.interpreted = interpreted;
    e.structural_dev = (interpreted - x_leader).norm();
    e.valuation_gap =
        std::abs(agent.valuation(interpreted) - agent.valuation(x_leader));
    e.structural_ok = e.structural_dev < eps;
    e.valuation_ok = e.valuation_gap < delta;
    report.coordinated =
        report.coordinated && e.structural_ok && e.valuation_ok;
    report.entries.push_back(std::move(e));
  }
  return report;
}

// Scalar valuation mixing along activated edges:
//   Val_i <- (1 - alpha) * Val_i + alpha * Val_j.
struct ValuationUpdateRule {
  double alpha = 0.5;
};

struct ValuationEvent {
  int replicate = 0;
  int step = 0;
  std::string from;
  std::string to;
  double before = 0.0;
  double after = 0.0;
  bool leader_derived_source = false;
  double dist_before = 0.0;  // |before - val_leader|
  double dist_after = 0.0;   // |after  - val_leader|
};

struct ValuationConvergenceReport {
  // The leader valuation lies strictly outside the hull (interval) of the
  // initial follower valuations. When false, convergence monotonicity is not
  // asserted and a warning is recorded; the run still proceeds.
  bool hypothesis_holds = false;
  bool monotone = true;  // no event increased distance to the leader value
  // Every event with a leader-derived source and positive prior distance
  // strictly decreased the distance.
  bool strict_on_leader_lineage = true;
  std::vector<ValuationEvent> events;
  std::map<std::string, double> final_vals;  // last replicate
  std::vector<std::string> warnings;
};

// Runs the scalar valuation convergence process over the influence graph.
// Valuations carry a provenance bit: the leader's value is leader-derived,
// and a follower's becomes leader-derived after any update whose source was.
// Edges fire with their probabilities (counter-based coins, stable order,
// within-step updates visible to later edges).
inline ValuationConvergenceReport run_valuation_convergence(
    const InfluenceGraph& g, const std::string& leader, double val_leader,
    const std::map<std::string, double>& initial_vals,
    const ValuationUpdateRule& rule, const SimulationConfig& cfg) {
  detail::validate_graph(g);
  if (std::find(g.nodes.begin(), g.nodes.end(), leader) == g.nodes.end()) {
    throw UnknownLeader("run_valuation_convergence: leader '" + leader +
                        "' is not a graph node");
  }
  if (!(rule.alpha > 0.0) || rule.alpha > 1.0) {
    throw BadParameter("run_valuation_convergence: alpha must lie in (0, 1]");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const std::string& node : g.nodes) {
    if (node == leader) continue;
    const auto it = initial_vals.find(node);
    if (it == initial_vals.end()) {
      throw BadParameter("run_valuation_convergence: follower '" + node +
                         "' has no initial valuation");
    }
    lo = std::min(lo, it->second);
    hi = std::max(hi, it->second);
  }

  ValuationConvergenceReport report;
  report.hypothesis_holds =
      lo <= hi && (val_leader < lo || val_leader > hi);
  if (!report.hypothesis_holds) {
    report.warnings.push_back(
        "HypothesisViolated: leader valuation lies inside the initial "
        "follower valuation hull; monotonicity is not asserted");
  }

  for (int rep = 0; rep < cfg.replicates; ++rep) {
    std::map<std::string, double> vals;
    std::map<std::string, bool> lineage;
    for (const std::string& node : g.nodes) {
      vals[node] = node == leader ? val_leader : initial_vals.at(node);
      lineage[node] = node == leader;
    }
    for (int step = 1; step <= cfg.max_steps; ++step) {
      for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
        const InfluenceEdge& edge = g.edges[ei];
        const double c = detail::coin(cfg.seed, static_cast<std::uint64_t>(rep),
                                      static_cast<std::uint64_t>(step),
                                      static_cast<std::uint64_t>(ei));
        if (c >= edge.influence_probability) continue;
        if (edge.to == leader) continue;  // the leader's value is fixed
        ValuationEvent ev;
        ev.replicate = rep;
        ev.step = step;
        ev.from = edge.from;
        ev.to = edge.to;
        ev.before = vals[edge.to];
        ev.after =
            (1.0 - rule.alpha) * vals[edge.to] + rule.alpha * vals[edge.from];
        ev.leader_derived_source = lineage[edge.from];
        ev.dist_before = std::abs(ev.before - val_leader);
        ev.dist_after = std::abs(ev.after - val_leader);
        vals[edge.to] = ev.after;
        lineage[edge.to] = lineage[edge.to] || lineage[edge.from];
        if (ev.dist_after > ev.dist_before + 1e-12) report.monotone = false;
        if (ev.leader_derived_source && ev.dist_before > 1e-12 &&
            !(ev.dist_after < ev.dist_before)) {
          report.strict_on_leader_lineage = false;
        }
        if (cfg.record_events) report.events.push_back(std::move(ev));
      }
    }
    if (rep == cfg.replicates - 1) report.final_vals = std::move(vals);
  }
  return report;
}

enum class LeadershipStyle { Interpolator, Innovator };

struct HullLeadershipReport {
  LeadershipStyle style = LeadershipStyle::Interpolator;
  HullMembership membership;
};

// Classifies a leader's content against the convex hull of the group's
// positions: inside = Interpolator, outside = Innovator.
inline HullLeadershipReport convex_hull_leadership_check(
    const Vec& x_leader, const std::vector<Vec>& group,
    const TolerancePolicy& tol = {}) {
  HullLeadershipReport report;
  report.membership = convex_hull_membership(x_leader, group, tol);
  report.style = report.membership.inside ? LeadershipStyle::Interpolator
                                          : LeadershipStyle::Innovator;
  return report;
}

// Per-agent representation update applied during one lifecycle step. The
// default identity rule leaves representations unchanged.
using LifecycleUpdate = std::function<Vec(const std::string&, const Vec&)>;

// Birth / death bookkeeping for a being observed across steps. Norms are
// recorded at the entry of each step (before that step's update runs), so the
// first update of a process is observed at step 1 acting on the step-0 state.
struct LifecycleRecord {
  std::optional<int> birth_step;
  std::optional<int> death_step;
  // (step, per-agent representation norm) in observation order.
  std::vector<std::pair<int, std::map<std::string, double>>> norms;

  void observe(const AbstractBeing& b, const std::vector<std::string>& population,
               int step, double threshold = existence_threshold()) {
    std::map<std::string, double> snapshot;
    bool any_alive = false;
    for (const std::string& id : population) {
      const auto it = b.representations.find(id);
      const double n = it == b.representations.end() ? 0.0 : it->second.norm();
      snapshot[id] = n;
      any_alive = any_alive || n > threshold;
    }
    norms.emplace_back(step, std::move(snapshot));
    if (any_alive) {
      if (!birth_step.has_value()) birth_step = step;
      // Death must be final; a revival invalidates a previously recorded one.
      death_step.reset();
    } else if (birth_step.has_value() && !death_step.has_value()) {
      death_step = step;
    }
  }
};

// Observes the being at the entry of `step`, then applies the update rule to
// every representation the being currently holds. Injection of new
// representations is the driver's concern (mutate the being between steps).
inline AbstractBeing step_lifecycle(const AbstractBeing& b,
                                    const std::vector<std::string>& population,
                                    const LifecycleUpdate& update, int step,
                                    LifecycleRecord& record,
                                    double threshold = existence_threshold()) {
  record.observe(b, population, step, threshold);
  AbstractBeing out = b;
  out.birth_step = record.birth_step;
  if (update) {
    for (auto& [agent_id, rep] : out.representations) {
      rep = update(agent_id, rep);
    }
  }
  return out;
}

}  // namespace vsdyn
