#pragma once
// Agents and the objects they reason about: value spaces with labeled axes,
// valuation functions, motivational gradients, and abstract beings that exist
// for an agent exactly when that agent's representation of them is nonzero.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/errors.hpp"
#include "vsdyn/linalg.hpp"

namespace vsdyn {

// A finite-dimensional space of valued qualities with human-readable axis
// labels (one per dimension, unique).
struct ValueSpace {
  int dim = 0;
  std::vector<std::string> basis_labels;
};

enum class ValuationKind { WeightedSum, Norm, Linear };

// Maps a vector of the agent's value space to a scalar worth.
//  - WeightedSum / Linear: w . v (the two kinds are kept distinct so scenario
//    files can state intent, but share the functional form).
//  - Norm: sqrt(v^T G v) for an SPD metric G (identity when absent).
struct ValuationFunction {
  ValuationKind kind = ValuationKind::WeightedSum;
  Vec weights;                // WeightedSum / Linear
  std::optional<Mat> metric;  // Norm

  static ValuationFunction sum(int dim) {
    ValuationFunction f;
    f.kind = ValuationKind::WeightedSum;
    f.weights = Vec::Ones(dim);
    return f;
  }
  static ValuationFunction weighted_sum(Vec w) {
    ValuationFunction f;
    f.kind = ValuationKind::WeightedSum;
    f.weights = std::move(w);
    return f;
  }
  static ValuationFunction linear(Vec w) {
    ValuationFunction f;
    f.kind = ValuationKind::Linear;
    f.weights = std::move(w);
    return f;
  }
  static ValuationFunction norm() {
    ValuationFunction f;
    f.kind = ValuationKind::Norm;
    return f;
  }
  static ValuationFunction norm_with_metric(Mat g) {
    detail::require_spd(g, "ValuationFunction metric");
    ValuationFunction f;
    f.kind = ValuationKind::Norm;
    f.metric = std::move(g);
    return f;
  }

  double operator()(const Vec& v) const {
    switch (kind) {
      case ValuationKind::WeightedSum:
      case ValuationKind::Linear: {
        detail::require_same_size(weights, v, "valuation weights");
        return weights.dot(v);
      }
      case ValuationKind::Norm: {
        if (!metric.has_value()) return v.norm();
        if (metric->cols() != v.size()) {
          throw DimensionMismatch("valuation metric does not match vector");
        }
        const double q = v.dot(*metric * v);
        // Guard round-off: the quadratic form of an SPD metric is >= 0.
        return std::sqrt(std::max(0.0, q));
      }
    }
    throw Error("valuation: unknown kind");
  }
};

// An agent: a value space, a valuation over it, and two privileged vectors —
// where the agent is and where it wants to be.
struct Agent {
  std::string id;
  ValueSpace space;
  ValuationFunction valuation;
  Vec current_state;
  Vec goal_state;
};

// Direction of motivated change: goal minus current state.
inline Vec motivational_gradient(const Agent& a) {
  detail::require_same_size(a.goal_state, a.current_state,
                            "motivational_gradient");
  return a.goal_state - a.current_state;
}

// Applies the agent's valuation function to a vector of its space.
inline double valuate(const Agent& a, const Vec& v) { return a.valuation(v); }

// Degree to which holding a belief vector advances a motivational gradient:
// their inner product. Positive = the belief serves the motivation.
inline double belief_alignment(const Vec& belief, const Vec& gradient) {
  detail::require_same_size(belief, gradient, "belief_alignment");
  return belief.dot(gradient);
}

// A shared object of thought: per-agent vector representations keyed by agent
// id. A being may exist for some agents and not others.
struct AbstractBeing {
  std::string id;
  std::map<std::string, Vec> representations;
  std::optional<int> birth_step;
};

// True when `agent_id` holds a representation with norm above `threshold`.
inline bool exists_for(const AbstractBeing& b, const std::string& agent_id,
                       double threshold = existence_threshold()) {
  const auto it = b.representations.find(agent_id);
  return it != b.representations.end() && it->second.norm() > threshold;
}

// A being is dead for a population when it exists for none of its members.
inline bool is_dead(const AbstractBeing& b,
                    const std::vector<std::string>& population,
                    double threshold = existence_threshold()) {
  for (const std::string& id : population) {
    if (exists_for(b, id, threshold)) return false;
  }
  return true;
}

}  // namespace vsdyn
