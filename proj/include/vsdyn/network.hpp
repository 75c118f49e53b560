#pragma once
// Influence networks: the repeated independent influence process (per-step
// Bernoulli edge attempts with first-wins adoption), leadership components
// via fixed-point subspace propagation, the no-null-space leadership check,
// and geometric activation-time facts.
//
// Determinism contract: edges are processed in declaration order within each
// step, every coin is a pure function of (seed, replicate, step, edge index),
// and adoptions made earlier in a step are visible to later edges of the same
// step.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/agents.hpp"
#include "vsdyn/errors.hpp"
#include "vsdyn/interpretation.hpp"
#include "vsdyn/linalg.hpp"
#include "vsdyn/rng.hpp"

namespace vsdyn {

// A directed influence channel: when `from` holds the being, each step it
// attempts transmission with probability `influence_probability`, translating
// through `map` (from -> to).
struct InfluenceEdge {
  std::string from;
  std::string to;
  double influence_probability = 1.0;
  InterpretationMap map;
};

struct InfluenceGraph {
  std::vector<std::string> nodes;
  std::vector<InfluenceEdge> edges;  // declaration order is the stable order
};

struct SimulationConfig {
  std::uint64_t seed = 0;
  int max_steps = 50;
  int replicates = 1;
  // Received images at or below this norm are not adopted.
  double adoption_threshold = existence_threshold();
  // Large statistical runs can disable per-event logging and keep only
  // adoption steps and final representations.
  bool record_events = true;
};

struct TraceEvent {
  int step = 0;
  int edge_index = 0;
  std::string from;
  std::string to;
  bool success = false;  // the Bernoulli attempt fired
  bool adopted = false;  // the target newly adopted on this event
  Vec transmitted;       // image vector when success; empty otherwise
};

struct SimulationTrace {
  int replicate = 0;
  std::vector<TraceEvent> events;
  std::map<std::string, Vec> final_representations;  // holders only
  std::map<std::string, int> adoption_step;          // origin recorded at 0
};

namespace detail {

inline void validate_graph(const InfluenceGraph& g) {
  const std::set<std::string> nodes(g.nodes.begin(), g.nodes.end());
  if (nodes.size() != g.nodes.size()) {
    throw BadParameter("influence graph: duplicate node id");
  }
  for (const InfluenceEdge& e : g.edges) {
    if (!nodes.count(e.from) || !nodes.count(e.to)) {
      throw BadParameter("influence graph: edge endpoint '" + e.from + "'->'" +
                         e.to + "' is not a declared node");
    }
    if (!(e.influence_probability > 0.0) || e.influence_probability > 1.0) {
      throw BadProbability("influence graph: edge '" + e.from + "'->'" + e.to +
                           "' probability must lie in (0, 1]");
    }
  }
}

}  // namespace detail

// Runs the repeated independent influence process. Per replicate, per step,
// every edge whose source currently holds the being attempts transmission;
// on success the image is logged, and a target that does not yet hold the
// being adopts the first received image with norm above the adoption
// threshold. Attempts continue after adoption (logged, never overwriting).
inline std::vector<SimulationTrace> run_influence_process(
    const InfluenceGraph& g, const AbstractBeing& being,
    const std::string& origin, const SimulationConfig& cfg) {
  detail::validate_graph(g);
  if (std::find(g.nodes.begin(), g.nodes.end(), origin) == g.nodes.end()) {
    throw UnknownOrigin("run_influence_process: origin '" + origin +
                        "' is not a graph node");
  }
  const auto rep_it = being.representations.find(origin);
  if (rep_it == being.representations.end() ||
      rep_it->second.norm() <= cfg.adoption_threshold) {
    throw OriginHoldsNothing("run_influence_process: origin '" + origin +
                             "' holds no representation of '" + being.id +
                             "'");
  }
  if (cfg.max_steps < 1) {
    throw BadParameter("run_influence_process: max_steps must be >= 1");
  }
  if (cfg.replicates < 1) {
    throw BadParameter("run_influence_process: replicates must be >= 1");
  }

  std::vector<SimulationTrace> traces;
  traces.reserve(static_cast<std::size_t>(cfg.replicates));
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    SimulationTrace trace;
    trace.replicate = rep;
    std::map<std::string, Vec> held;
    held.emplace(origin, rep_it->second);
    trace.adoption_step[origin] = 0;
    for (int step = 1; step <= cfg.max_steps; ++step) {
      for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
        const InfluenceEdge& edge = g.edges[ei];
        const auto src = held.find(edge.from);
        if (src == held.end()) continue;
        const double c = detail::coin(cfg.seed, static_cast<std::uint64_t>(rep),
                                      static_cast<std::uint64_t>(step),
                                      static_cast<std::uint64_t>(ei));
        const bool success = c < edge.influence_probability;
        if (!success) {
          if (cfg.record_events) {
            trace.events.push_back({step, static_cast<int>(ei), edge.from,
                                    edge.to, false, false, Vec()});
          }
          continue;
        }
        Vec image = apply(edge.map, src->second);
        bool adopted = false;
        if (!held.count(edge.to) && image.norm() > cfg.adoption_threshold) {
          held.emplace(edge.to, image);
          trace.adoption_step[edge.to] = step;
          adopted = true;
        }
        if (cfg.record_events) {
          trace.events.push_back({step, static_cast<int>(ei), edge.from,
                                  edge.to, true, adopted, std::move(image)});
        }
      }
    }
    trace.final_representations = std::move(held);
    traces.push_back(std::move(trace));
  }
  return traces;
}

// Detailed result of the leadership-component computation.
struct LeadershipAnalysis {
  std::set<std::string> members;
  std::map<std::string, int> subspace_dim;  // reached subspace per node
  int sweeps = 0;                           // full edge passes executed
};

// Computes the leadership component of `leader` for content x_leader by
// fixed-point subspace propagation: each node accumulates the subspace of
// content reachable from span{x_leader} along edge maps; membership means a
// nonzero reachable subspace. Each sweep either grows some subspace or the
// iteration stops, so at most (sum of space dimensions) growth sweeps occur.
inline LeadershipAnalysis leadership_component_detail(
    const InfluenceGraph& g, const std::string& leader, const Vec& x_leader,
    const TolerancePolicy& tol = {}) {
  detail::validate_graph(g);
  if (std::find(g.nodes.begin(), g.nodes.end(), leader) == g.nodes.end()) {
    throw UnknownLeader("leadership_component: leader '" + leader +
                        "' is not a graph node");
  }
  if (x_leader.norm() <= existence_threshold(tol)) {
    throw ZeroVector("leadership_component: leader content is zero");
  }

  // Orthonormal column bases per node; absent = empty subspace.
  std::map<std::string, Mat> bases;
  bases[leader] = x_leader.normalized();

  // A direction is genuinely new when its component orthogonal to the current
  // basis exceeds this fraction of the image norm (anchored at unit scale).
  const double residual_floor = 1e-10;

  LeadershipAnalysis out;
  bool grew = true;
  while (grew) {
    grew = false;
    ++out.sweeps;
    for (const InfluenceEdge& edge : g.edges) {
      const auto src = bases.find(edge.from);
      if (src == bases.end()) continue;
      for (Eigen::Index c = 0; c < src->second.cols(); ++c) {
        Vec image = edge.map.matrix * src->second.col(c);
        const double image_norm = image.norm();
        if (image_norm <= existence_threshold(tol)) continue;
        auto dst = bases.find(edge.to);
        if (dst == bases.end()) {
          Mat b(image.size(), 1);
          b.col(0) = image / image_norm;
          bases.emplace(edge.to, std::move(b));
          grew = true;
          continue;
        }
        Mat& basis = dst->second;
        if (basis.cols() >= basis.rows()) continue;  // subspace already full
        // Orthogonalize twice for numerical stability.
        Vec res = image - basis * (basis.transpose() * image);
        res -= basis * (basis.transpose() * res);
        if (res.norm() > residual_floor * std::max(1.0, image_norm)) {
          basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
          basis.col(basis.cols() - 1) = res.normalized();
          grew = true;
        }
      }
    }
  }

  for (const std::string& node : g.nodes) {
    const auto it = bases.find(node);
    const int dim = it == bases.end() ? 0 : static_cast<int>(it->second.cols());
    out.subspace_dim[node] = dim;
    if (dim > 0) out.members.insert(node);
  }
  return out;
}

inline std::set<std::string> leadership_component(
    const InfluenceGraph& g, const std::string& leader, const Vec& x_leader,
    const TolerancePolicy& tol = {}) {
  return leadership_component_detail(g, leader, x_leader, tol).members;
}

enum class LeadVerdict { InComponentAdopts, OutOfComponentNever };

// Empirical cross-check of the no-null-space leadership condition.
struct NoNullSpaceReport {
  std::set<std::string> component;
  std::map<std::string, LeadVerdict> verdict;
  std::map<std::string, int> adoption_replicates;  // replicates that adopted
  bool consistent = true;  // simulation agreed with the component prediction
  int max_steps_used = 0;
};

// Predicts membership via the leadership component, then Monte-Carlo checks
// it: in-component nodes must adopt in every replicate (max_steps is sized by
// the geometric tail bound so the predicted failure mass is below 1e-6), and
// out-of-component nodes must never hold the being above threshold.
inline NoNullSpaceReport verify_no_null_space_condition(
    const InfluenceGraph& g, const std::string& leader,
    const AbstractBeing& being, SimulationConfig cfg,
    const TolerancePolicy& tol = {}) {
  const auto rep_it = being.representations.find(leader);
  if (rep_it == being.representations.end()) {
    throw OriginHoldsNothing("verify_no_null_space_condition: leader '" +
                             leader + "' holds no representation");
  }
  NoNullSpaceReport report;
  report.component = leadership_component(g, leader, rep_it->second, tol);

  // Size max_steps: give each edge a window long enough that the chance it
  // never fires inside the window is below 1e-6 / edge count, then let paths
  // consume windows sequentially.
  const double edge_count = std::max<std::size_t>(g.edges.size(), 1);
  int needed = 1;
  for (const InfluenceEdge& e : g.edges) {
    int window = 1;
    if (e.influence_probability < 1.0) {
      window = static_cast<int>(std::ceil(std::log(1e-6 / edge_count) /
                                          std::log1p(-e.influence_probability)));
      window = std::max(window, 1);
    }
    needed += window;
  }
  cfg.max_steps = std::max(cfg.max_steps, needed);
  cfg.record_events = false;
  report.max_steps_used = cfg.max_steps;

  const auto traces = run_influence_process(g, being, leader, cfg);
  for (const std::string& node : g.nodes) report.adoption_replicates[node] = 0;
  for (const SimulationTrace& trace : traces) {
    for (const auto& [node, step] : trace.adoption_step) {
      report.adoption_replicates[node] += 1;
    }
  }
  for (const std::string& node : g.nodes) {
    const bool member = report.component.count(node) > 0;
    report.verdict[node] = member ? LeadVerdict::InComponentAdopts
                                  : LeadVerdict::OutOfComponentNever;
    const int adopted = report.adoption_replicates[node];
    if (member && adopted != cfg.replicates) report.consistent = false;
    if (!member && adopted != 0) report.consistent = false;
  }
  return report;
}

// Expected steps until a single edge of probability p first fires: 1 / p.
inline double expected_activation_time(double p) {
  if (!(p > 0.0) || p > 1.0) {
    throw BadProbability("expected_activation_time: p must lie in (0, 1]");
  }
  return 1.0 / p;
}

// Probability the edge has not fired after T attempts: (1 - p)^T.
inline double activation_tail(double p, int t) {
  if (!(p > 0.0) || p > 1.0) {
    throw BadProbability("activation_tail: p must lie in (0, 1]");
  }
  if (t < 0) throw BadIndex("activation_tail: T must be >= 0");
  return std::pow(1.0 - p, t);
}

}  // namespace vsdyn
