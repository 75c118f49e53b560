#pragma once
// Analysis blocks: each `analysis <kind> <name> { ... }` statement in a
// scenario compiles into one engine call and one JSON block in the run
// report. `check_analyses` validates every block and collects all problems;
// `run_report` executes them. Validation failures are structural (unknown
// kinds or keys, unresolved references, malformed numbers); anything the
// engine itself rejects at run time surfaces as an engine exception.

#include <json.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/applications.hpp"
#include "vsdyn/counterfactuals.hpp"
#include "vsdyn/dynamics.hpp"
#include "vsdyn/interpretation.hpp"
#include "vsdyn/network.hpp"
#include "vsdyn/scenario.hpp"
#include "vsdyn/trace_io.hpp"

namespace vsdyn {

using AnalysisJson = nlohmann::ordered_json;

namespace detail {

inline AnalysisJson json_vec(const Vec& v) {
  AnalysisJson arr = AnalysisJson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

inline AnalysisJson json_mat(const Mat& m) {
  AnalysisJson rows = AnalysisJson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(json_vec(m.row(i).transpose()));
  }
  return rows;
}

// Key-driven reader over one analysis block. Collects issues instead of
// throwing so every problem in a scenario is reported at once.
struct AnalysisReader {
  const Scenario& sc;
  const AnalysisSpec& spec;
  std::string file;
  std::vector<std::string>& issues;
  std::size_t entry_count;

  AnalysisReader(const Scenario& s, const AnalysisSpec& a,
                 const std::string& f, std::vector<std::string>& out)
      : sc(s), spec(a), file(f), issues(out), entry_count(out.size()) {}

  bool ok() const { return issues.size() == entry_count; }

  void fail(int line, const std::string& message) {
    issues.push_back(file + ":" + std::to_string(line) + ": analysis '" +
                     spec.name + "': " + message);
  }

  void allow(const std::set<std::string>& keys) {
    for (const ScenarioNode& child : spec.node.children) {
      if (!keys.count(child.head())) {
        fail(child.line, "unknown key '" + child.head() + "'");
      }
    }
  }

  const ScenarioNode* find(const std::string& key) const {
    for (const ScenarioNode& child : spec.node.children) {
      if (child.head() == key) return &child;
    }
    return nullptr;
  }

  std::vector<const ScenarioNode*> find_all(const std::string& key) const {
    std::vector<const ScenarioNode*> out;
    for (const ScenarioNode& child : spec.node.children) {
      if (child.head() == key) out.push_back(&child);
    }
    return out;
  }

  // Vector value: `key 1 2 3`, `key state <agent>`, or `key goal <agent>`.
  bool vec_from(const ScenarioNode& node, std::size_t from, Vec& out) {
    if (node.tokens.size() > from + 1 && (node.tokens[from] == "state" ||
                                          node.tokens[from] == "goal")) {
      const ScenarioAgent* a = sc.find_agent(node.tokens[from + 1]);
      if (a == nullptr) {
        fail(node.line, "unknown agent '" + node.tokens[from + 1] + "'");
        return false;
      }
      out = node.tokens[from] == "state" ? a->agent.current_state
                                         : a->agent.goal_state;
      return true;
    }
    bool ok = true;
    std::vector<double> vals;
    for (std::size_t i = from; i < node.tokens.size(); ++i) {
      double v = 0.0;
      if (!parse_number(node.tokens[i], v)) {
        fail(node.line, "'" + node.tokens[i] + "' is not a number");
        ok = false;
      }
      vals.push_back(v);
    }
    if (vals.empty()) {
      fail(node.line, "'" + node.head() + "' expects components");
      return false;
    }
    if (!ok) return false;
    out = Eigen::Map<const Vec>(vals.data(),
                                static_cast<Eigen::Index>(vals.size()));
    return true;
  }

  bool req_vec(const std::string& key, Vec& out) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) {
      fail(spec.line, "missing '" + key + "'");
      return false;
    }
    return vec_from(*node, 1, out);
  }

  bool opt_vec(const std::string& key, Vec& out, bool& present) {
    const ScenarioNode* node = find(key);
    present = node != nullptr;
    return present ? vec_from(*node, 1, out) : true;
  }

  bool req_number(const std::string& key, double& out) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) {
      fail(spec.line, "missing '" + key + "'");
      return false;
    }
    if (node->tokens.size() != 2 || !parse_number(node->tokens[1], out)) {
      fail(node->line, "'" + key + "' expects one number");
      return false;
    }
    return true;
  }

  bool opt_number(const std::string& key, double& out) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) return true;
    if (node->tokens.size() != 2 || !parse_number(node->tokens[1], out)) {
      fail(node->line, "'" + key + "' expects one number");
      return false;
    }
    return true;
  }

  bool opt_int(const std::string& key, int& out) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) return true;
    long long v = 0;
    if (node->tokens.size() != 2 || !parse_integer(node->tokens[1], v)) {
      fail(node->line, "'" + key + "' expects one integer");
      return false;
    }
    out = static_cast<int>(v);
    return true;
  }

  bool opt_uint64(const std::string& key, std::uint64_t& out) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) return true;
    long long v = 0;
    if (node->tokens.size() != 2 || !parse_integer(node->tokens[1], v)) {
      fail(node->line, "'" + key + "' expects one integer");
      return false;
    }
    out = static_cast<std::uint64_t>(v);
    return true;
  }

  bool opt_bool(const std::string& key, bool& out) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) return true;
    if (node->tokens.size() != 2 ||
        (node->tokens[1] != "true" && node->tokens[1] != "false")) {
      fail(node->line, "'" + key + "' expects true or false");
      return false;
    }
    out = node->tokens[1] == "true";
    return true;
  }

  std::string req_token(const std::string& key) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) {
      fail(spec.line, "missing '" + key + "'");
      return "";
    }
    if (node->tokens.size() != 2) {
      fail(node->line, "'" + key + "' expects one value");
      return "";
    }
    return node->tokens[1];
  }

  const ScenarioMap* map_by_id(int line, const std::string& id) {
    const ScenarioMap* m = sc.find_map(id);
    if (m == nullptr) fail(line, "unknown map '" + id + "'");
    return m;
  }

  const ScenarioAgent* agent_by_id(int line, const std::string& id) {
    const ScenarioAgent* a = sc.find_agent(id);
    if (a == nullptr) fail(line, "unknown agent '" + id + "'");
    return a;
  }

  const ScenarioMap* req_map(const std::string& key) {
    const std::string id = req_token(key);
    if (id.empty()) return nullptr;
    return map_by_id(find(key)->line, id);
  }

  const ScenarioAgent* req_agent(const std::string& key) {
    const std::string id = req_token(key);
    if (id.empty()) return nullptr;
    return agent_by_id(find(key)->line, id);
  }

  // A path of map ids composed in application order.
  bool req_path(const std::string& key, std::vector<InterpretationMap>& out) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) {
      fail(spec.line, "missing '" + key + "'");
      return false;
    }
    if (node->tokens.size() < 2) {
      fail(node->line, "'" + key + "' expects at least one map id");
      return false;
    }
    bool ok = true;
    for (std::size_t i = 1; i < node->tokens.size(); ++i) {
      const ScenarioMap* m = map_by_id(node->line, node->tokens[i]);
      if (m == nullptr) {
        ok = false;
        continue;
      }
      out.push_back(m->map);
    }
    return ok;
  }

  bool req_matrix(const std::string& key, Mat& out) {
    const ScenarioNode* node = find(key);
    if (node == nullptr) {
      fail(spec.line, "missing '" + key + "'");
      return false;
    }
    ScenarioReader inner;
    inner.file = file;
    const bool ok = inner.matrix_block(*node, out, "'" + key + "'");
    for (const std::string& msg : inner.issues) issues.push_back(msg);
    return ok;
  }

  bool require_graph() {
    if (!sc.has_graph) {
      fail(spec.line, "requires a graph block");
      return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// One executor per analysis kind. With dry == true the executor only resolves
// and validates its inputs.

inline AnalysisJson exec_interpret(AnalysisReader& r, bool dry) {
  r.allow({"path", "input", "matrix"});
  std::vector<InterpretationMap> maps;
  Vec input;
  bool want_matrix = false;
  r.req_path("path", maps);
  r.req_vec("input", input);
  r.opt_bool("matrix", want_matrix);
  const ScenarioAgent* src = nullptr;
  const ScenarioAgent* dst = nullptr;
  if (!maps.empty()) {
    src = r.agent_by_id(r.spec.line, maps.front().source);
    dst = r.agent_by_id(r.spec.line, maps.back().target);
  }
  if (dry || !r.ok()) return {};

  const InterpretationMap composite = compose_path(maps);
  const Vec image = apply(composite, input);
  AnalysisJson out;
  out["source"] = composite.source;
  out["target"] = composite.target;
  out["input"] = json_vec(input);
  out["image"] = json_vec(image);
  out["image_norm"] = image.norm();
  out["val_source"] = src->agent.valuation(input);
  out["val_target"] = dst->agent.valuation(image);
  if (want_matrix) out["matrix"] = json_mat(composite.matrix);
  return out;
}

inline AnalysisJson exec_gradient(AnalysisReader& r, bool dry) {
  r.allow({"agent"});
  const ScenarioAgent* a = r.req_agent("agent");
  if (dry || !r.ok()) return {};
  const Vec m = motivational_gradient(a->agent);
  AnalysisJson out;
  out["agent"] = a->agent.id;
  out["gradient"] = json_vec(m);
  out["norm"] = m.norm();
  return out;
}

inline AnalysisJson exec_alignment(AnalysisReader& r, bool dry) {
  r.allow({"belief", "agent", "gradient"});
  Vec belief;
  r.req_vec("belief", belief);
  Vec gradient;
  bool has_gradient = false;
  r.opt_vec("gradient", gradient, has_gradient);
  const ScenarioAgent* a = nullptr;
  if (!has_gradient) {
    a = r.req_agent("agent");
  } else if (r.find("agent") != nullptr) {
    r.fail(r.spec.line, "give either 'agent' or 'gradient', not both");
  }
  if (dry || !r.ok()) return {};
  if (a != nullptr) gradient = motivational_gradient(a->agent);
  AnalysisJson out;
  out["belief"] = json_vec(belief);
  out["gradient"] = json_vec(gradient);
  out["alignment"] = belief_alignment(belief, gradient);
  return out;
}

inline AnalysisJson exec_understanding(AnalysisReader& r, bool dry) {
  r.allow({"map_a", "map_b", "input"});
  const ScenarioMap* ma = r.req_map("map_a");
  const ScenarioMap* mb = r.req_map("map_b");
  Vec input;
  r.req_vec("input", input);
  if (dry || !r.ok()) return {};
  const Vec image_a = apply(ma->map, input);
  const Vec image_b = apply(mb->map, input);
  AnalysisJson out;
  out["input"] = json_vec(input);
  out["image_a"] = json_vec(image_a);
  out["image_b"] = json_vec(image_b);
  out["cosine"] = cosine_similarity(image_a, image_b);
  return out;
}

inline AnalysisJson exec_consistency(AnalysisReader& r, bool dry) {
  r.allow({"forward", "backward", "input", "expected", "eps", "delta"});
  const ScenarioMap* fwd = r.req_map("forward");
  const ScenarioMap* bwd = r.req_map("backward");
  Vec input;
  r.req_vec("input", input);
  Vec expected;
  bool has_expected = false;
  r.opt_vec("expected", expected, has_expected);
  double eps = 0.0;
  double delta = 0.0;
  r.req_number("eps", eps);
  r.req_number("delta", delta);
  const ScenarioAgent* src = nullptr;
  const ScenarioAgent* dst = nullptr;
  if (fwd != nullptr) {
    src = r.agent_by_id(r.spec.line, fwd->map.source);
    dst = r.agent_by_id(r.spec.line, fwd->map.target);
  }
  if (dry || !r.ok()) return {};

  const ConsistencyReport rep =
      has_expected
          ? check_consistency(fwd->map, bwd->map, input, expected, eps, delta,
                              src->agent.valuation, dst->agent.valuation)
          : check_consistency(fwd->map, bwd->map, input, eps, delta,
                              src->agent.valuation, dst->agent.valuation);
  AnalysisJson out;
  out["mode"] = rep.mode == ConsistencyMode::SuppliedTarget
                    ? "supplied_target"
                    : "theorem_premise";
  out["forward_dev"] = rep.forward_dev;
  out["backward_dev"] = rep.backward_dev;
  out["valuation_gap"] = rep.valuation_gap;
  out["forward_ok"] = rep.forward_ok;
  out["backward_ok"] = rep.backward_ok;
  out["valuation_ok"] = rep.valuation_ok;
  out["consistent"] = rep.consistent();
  return out;
}

inline AnalysisJson exec_blindness(AnalysisReader& r, bool dry) {
  r.allow({"map", "probe"});
  const ScenarioMap* m = r.req_map("map");
  struct Probe {
    std::string name;
    Vec v;
  };
  std::vector<Probe> probes;
  for (const ScenarioNode* node : r.find_all("probe")) {
    if (node->tokens.size() < 3) {
      r.fail(node->line, "probe expects '<name> <components...>'");
      continue;
    }
    Probe p;
    p.name = node->tokens[1];
    if (r.vec_from(*node, 2, p.v)) probes.push_back(std::move(p));
  }
  if (dry || !r.ok()) return {};

  const auto basis = null_space_basis(m->map.matrix);
  AnalysisJson out;
  out["map"] = r.req_token("map");
  out["null_dim"] = basis.size();
  AnalysisJson jb = AnalysisJson::array();
  for (const Vec& b : basis) jb.push_back(json_vec(b));
  out["null_basis"] = jb;
  AnalysisJson jp = AnalysisJson::array();
  for (const Probe& p : probes) {
    AnalysisJson e;
    e["name"] = p.name;
    e["input"] = json_vec(p.v);
    const Vec image = apply(m->map, p.v);
    e["image"] = json_vec(image);
    e["image_norm"] = image.norm();
    e["blind"] = is_blind_to(m->map, p.v);
    jp.push_back(std::move(e));
  }
  out["probes"] = jp;
  return out;
}

inline AnalysisJson exec_propagate(AnalysisReader& r, bool dry) {
  r.allow({"input", "path", "threshold"});
  Vec input;
  r.req_vec("input", input);
  std::vector<InterpretationMap> maps;
  r.req_path("path", maps);
  double threshold = existence_threshold();
  r.opt_number("threshold", threshold);
  if (dry || !r.ok()) return {};

  AnalysisJson stages = AnalysisJson::array();
  Vec current = input;
  const ScenarioNode* path_node = r.find("path");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    current = apply(maps[i], current);
    AnalysisJson stage;
    stage["map"] = path_node->tokens[i + 1];
    stage["at"] = maps[i].target;
    stage["vector"] = json_vec(current);
    stage["norm"] = current.norm();
    stage["exists"] = current.norm() > threshold;
    stages.push_back(std::move(stage));
  }
  AnalysisJson out;
  out["input"] = json_vec(input);
  out["stages"] = stages;
  out["final"] = json_vec(current);
  out["final_norm"] = current.norm();
  return out;
}

inline AnalysisJson exec_compose(AnalysisReader& r, bool dry) {
  r.allow({"path", "probe", "matrix"});
  std::vector<InterpretationMap> maps;
  r.req_path("path", maps);
  bool want_matrix = true;
  r.opt_bool("matrix", want_matrix);
  struct Probe {
    std::string name;
    Vec v;
  };
  std::vector<Probe> probes;
  for (const ScenarioNode* node : r.find_all("probe")) {
    if (node->tokens.size() < 3) {
      r.fail(node->line, "probe expects '<name> <components...>'");
      continue;
    }
    Probe p;
    p.name = node->tokens[1];
    if (r.vec_from(*node, 2, p.v)) probes.push_back(std::move(p));
  }
  if (dry || !r.ok()) return {};

  const InterpretationMap composite = compose_path(maps);
  AnalysisJson out;
  out["source"] = composite.source;
  out["target"] = composite.target;
  if (want_matrix) out["matrix"] = json_mat(composite.matrix);
  AnalysisJson jp = AnalysisJson::array();
  for (const Probe& p : probes) {
    AnalysisJson e;
    e["name"] = p.name;
    e["input"] = json_vec(p.v);
    const Vec image = apply(composite, p.v);
    e["image"] = json_vec(image);
    e["image_norm"] = image.norm();
    e["annihilated"] = image.norm() <= existence_threshold();
    jp.push_back(std::move(e));
  }
  out["probes"] = jp;
  return out;
}

inline AnalysisJson exec_leadership(AnalysisReader& r, bool dry) {
  r.allow({"leader", "being", "content", "verify", "replicates", "seed",
           "max_steps"});
  const ScenarioAgent* leader = r.req_agent("leader");
  r.require_graph();
  Vec content;
  bool has_content = false;
  r.opt_vec("content", content, has_content);
  const ScenarioBeing* being = nullptr;
  const ScenarioNode* being_node = r.find("being");
  if (being_node != nullptr) {
    if (has_content) {
      r.fail(being_node->line, "give either 'being' or 'content', not both");
    } else if (being_node->tokens.size() != 2) {
      r.fail(being_node->line, "'being' expects one id");
    } else {
      being = r.sc.find_being(being_node->tokens[1]);
      if (being == nullptr) {
        r.fail(being_node->line,
               "unknown being '" + being_node->tokens[1] + "'");
      }
    }
  } else if (!has_content) {
    r.fail(r.spec.line, "needs 'being <id>' or 'content <components...>'");
  }
  bool verify = false;
  r.opt_bool("verify", verify);
  int replicates = 100;
  r.opt_int("replicates", replicates);
  std::uint64_t seed = 0;
  r.opt_uint64("seed", seed);
  int max_steps = 50;
  r.opt_int("max_steps", max_steps);
  if (dry || !r.ok()) return {};

  AbstractBeing carrier;
  if (being != nullptr) {
    carrier = being->being;
  } else {
    carrier.id = "_content";
    carrier.representations.emplace(leader->agent.id, content);
  }
  const auto rep_it = carrier.representations.find(leader->agent.id);
  if (rep_it == carrier.representations.end()) {
    throw OriginHoldsNothing("analysis '" + r.spec.name + "': leader '" +
                             leader->agent.id +
                             "' holds no representation of the being");
  }
  const InfluenceGraph g = build_influence_graph(r.sc);
  const LeadershipAnalysis comp =
      leadership_component_detail(g, leader->agent.id, rep_it->second);
  AnalysisJson out;
  out["leader"] = leader->agent.id;
  out["members"] = AnalysisJson::array();
  for (const std::string& id : comp.members) out["members"].push_back(id);
  AnalysisJson dims;
  for (const auto& [id, d] : comp.subspace_dim) dims[id] = d;
  out["subspace_dim"] = dims;
  out["sweeps"] = comp.sweeps;
  if (verify) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.replicates = replicates;
    cfg.max_steps = max_steps;
    const NoNullSpaceReport rep =
        verify_no_null_space_condition(g, leader->agent.id, carrier, cfg);
    AnalysisJson jv;
    jv["consistent"] = rep.consistent;
    jv["replicates"] = replicates;
    jv["max_steps_used"] = rep.max_steps_used;
    AnalysisJson adoption;
    for (const auto& [id, n] : rep.adoption_replicates) adoption[id] = n;
    jv["adoption_replicates"] = adoption;
    AnalysisJson verdicts;
    for (const auto& [id, v] : rep.verdict) {
      verdicts[id] = v == LeadVerdict::InComponentAdopts
                         ? "in_component_adopts"
                         : "out_of_component_never";
    }
    jv["verdict"] = verdicts;
    out["verify"] = jv;
  }
  return out;
}

inline AnalysisJson exec_reception(AnalysisReader& r, bool dry) {
  r.allow({"leader", "content", "threshold", "map"});
  const ScenarioAgent* leader = r.req_agent("leader");
  Vec content;
  r.req_vec("content", content);
  double threshold = existence_threshold();
  r.opt_number("threshold", threshold);
  std::vector<const ScenarioMap*> maps;
  for (const ScenarioNode* node : r.find_all("map")) {
    if (node->tokens.size() != 2) {
      r.fail(node->line, "'map' expects one id");
      continue;
    }
    const ScenarioMap* m = r.map_by_id(node->line, node->tokens[1]);
    if (m != nullptr) maps.push_back(m);
  }
  if (maps.empty() && leader != nullptr) {
    for (const ScenarioMap& m : r.sc.maps) {
      if (m.map.source == leader->agent.id) maps.push_back(&m);
    }
    if (maps.empty()) {
      r.fail(r.spec.line, "no maps out of leader '" + leader->agent.id + "'");
    }
  }
  for (const ScenarioMap* m : maps) {
    if (leader != nullptr && m->map.source != leader->agent.id) {
      r.fail(r.spec.line, "map '" + m->id + "' does not start at the leader");
    }
  }
  if (dry || !r.ok()) return {};

  AnalysisJson out;
  out["leader"] = leader->agent.id;
  out["content"] = json_vec(content);
  out["threshold"] = threshold;
  AnalysisJson receivers = AnalysisJson::array();
  for (const ScenarioMap* m : maps) {
    AnalysisJson e;
    e["map"] = m->id;
    e["to"] = m->map.target;
    const Vec image = apply(m->map, content);
    e["image"] = json_vec(image);
    e["norm"] = image.norm();
    e["led"] = image.norm() >= threshold;
    receivers.push_back(std::move(e));
  }
  out["receivers"] = receivers;
  return out;
}

inline AnalysisJson exec_goal_adoption(AnalysisReader& r, bool dry) {
  r.allow({"agent", "adopted", "rule", "step"});
  const ScenarioAgent* a = r.req_agent("agent");
  Vec adopted;
  r.req_vec("adopted", adopted);
  GoalUpdateRule rule;
  double beta_scale = 0.0;
  const ScenarioNode* rule_node = r.find("rule");
  if (rule_node == nullptr) {
    r.fail(r.spec.line, "missing 'rule convex <alpha>' or "
                        "'rule additive <scale>'");
  } else if (rule_node->tokens.size() != 3 ||
             (rule_node->tokens[1] != "convex" &&
              rule_node->tokens[1] != "additive")) {
    r.fail(rule_node->line,
           "rule expects 'convex <alpha>' or 'additive <scale>'");
  } else {
    double v = 0.0;
    if (!parse_number(rule_node->tokens[2], v)) {
      r.fail(rule_node->line,
             "'" + rule_node->tokens[2] + "' is not a number");
    } else if (rule_node->tokens[1] == "convex") {
      rule.kind = GoalRuleKind::ConvexBlend;
      rule.alpha = v;
    } else {
      rule.kind = GoalRuleKind::Additive;
      beta_scale = v;
      rule.beta = [beta_scale](int k) { return beta_scale * k; };
    }
  }
  int step = 1;
  r.opt_int("step", step);
  if (dry || !r.ok()) return {};

  const Agent updated = update_goal(a->agent, adopted, rule, step);
  const Vec m_new = motivational_gradient(updated);
  AnalysisJson out;
  out["agent"] = a->agent.id;
  out["adopted"] = json_vec(adopted);
  out["goal_before"] = json_vec(a->agent.goal_state);
  out["goal_after"] = json_vec(updated.goal_state);
  out["gradient_after"] = json_vec(m_new);
  out["cos_gradient_adopted"] =
      m_new.norm() == 0.0 || adopted.norm() == 0.0
          ? 0.0
          : cosine_similarity(m_new, adopted);
  return out;
}

inline AnalysisJson exec_coordination(AnalysisReader& r, bool dry) {
  r.allow({"leader", "follower", "eps", "delta"});
  const ScenarioAgent* leader = r.req_agent("leader");
  double eps = 0.0;
  double delta = 0.0;
  r.req_number("eps", eps);
  r.req_number("delta", delta);
  struct Entry {
    const ScenarioAgent* agent;
    const ScenarioMap* map;
  };
  std::vector<Entry> entries;
  for (const ScenarioNode* node : r.find_all("follower")) {
    if (node->tokens.size() != 4 || node->tokens[2] != "via") {
      r.fail(node->line, "follower expects '<agent> via <map>'");
      continue;
    }
    Entry e;
    e.agent = r.agent_by_id(node->line, node->tokens[1]);
    e.map = r.map_by_id(node->line, node->tokens[3]);
    if (e.agent != nullptr && e.map != nullptr) entries.push_back(e);
  }
  if (entries.empty()) {
    r.fail(r.spec.line, "needs at least one 'follower <agent> via <map>'");
  }
  if (dry || !r.ok()) return {};

  const Vec x_leader = leader->agent.current_state;
  std::vector<std::pair<Agent, Vec>> followers;
  for (const Entry& e : entries) {
    followers.emplace_back(e.agent->agent, apply(e.map->map, x_leader));
  }
  const CoordinationReport rep =
      check_coordination(followers, x_leader, eps, delta);
  AnalysisJson out;
  out["leader"] = leader->agent.id;
  out["eps"] = eps;
  out["delta"] = delta;
  AnalysisJson je = AnalysisJson::array();
  for (const CoordinationEntry& e : rep.entries) {
    AnalysisJson j;
    j["id"] = e.id;
    j["interpreted"] = json_vec(e.interpreted);
    j["structural_dev"] = e.structural_dev;
    j["valuation_gap"] = e.valuation_gap;
    j["structural_ok"] = e.structural_ok;
    j["valuation_ok"] = e.valuation_ok;
    je.push_back(std::move(j));
  }
  out["entries"] = je;
  out["coordinated"] = rep.coordinated;
  return out;
}

inline AnalysisJson exec_persuasion(AnalysisReader& r, bool dry) {
  r.allow({"map", "input", "target"});
  const ScenarioMap* m = r.req_map("map");
  Vec input;
  r.req_vec("input", input);
  double target = 0.0;
  r.req_number("target", target);
  const ScenarioAgent* dst =
      m != nullptr ? r.agent_by_id(r.spec.line, m->map.target) : nullptr;
  if (dry || !r.ok()) return {};

  const ValuationFunction& val = dst->agent.valuation;
  const Mat adjust = persuasion_matrix(m->map, input, target, val);
  const Vec before = apply(m->map, input);
  const Vec after = adjust * before;
  AnalysisJson out;
  out["map"] = m->id;
  out["input"] = json_vec(input);
  out["scale"] = adjust(0, 0);
  out["val_before"] = val(before);
  out["val_after"] = val(after);
  out["target"] = target;
  return out;
}

inline AnalysisJson exec_hull(AnalysisReader& r, bool dry) {
  r.allow({"point", "vertex"});
  Vec point;
  r.req_vec("point", point);
  std::vector<Vec> vertices;
  for (const ScenarioNode* node : r.find_all("vertex")) {
    Vec v;
    if (r.vec_from(*node, 1, v)) vertices.push_back(std::move(v));
  }
  if (vertices.empty()) {
    r.fail(r.spec.line, "needs at least one 'vertex <components...>'");
  }
  if (dry || !r.ok()) return {};

  const HullLeadershipReport rep =
      convex_hull_leadership_check(point, vertices);
  AnalysisJson out;
  out["point"] = json_vec(point);
  out["inside"] = rep.membership.inside;
  out["style"] = rep.style == LeadershipStyle::Interpolator ? "interpolator"
                                                            : "innovator";
  if (rep.membership.inside) {
    AnalysisJson coeffs = AnalysisJson::array();
    for (const double c : rep.membership.coefficients) coeffs.push_back(c);
    out["coefficients"] = coeffs;
  }
  return out;
}

inline AnalysisJson exec_counterfactual(AnalysisReader& r, bool dry) {
  r.allow({"actual", "hypothetical", "map", "metric"});
  Vec actual, hypothetical;
  r.req_vec("actual", actual);
  r.req_vec("hypothetical", hypothetical);
  const ScenarioMap* m = nullptr;
  if (r.find("map") != nullptr) m = r.req_map("map");
  Mat metric;
  bool has_metric = false;
  if (r.find("metric") != nullptr) {
    has_metric = r.req_matrix("metric", metric);
  }
  if (dry || !r.ok()) return {};

  const Vec delta = displacement(actual, hypothetical);
  AnalysisJson out;
  out["actual"] = json_vec(actual);
  out["hypothetical"] = json_vec(hypothetical);
  out["displacement"] = json_vec(delta);
  const Mat w = has_metric
                    ? metric
                    : Mat(Mat::Identity(delta.size(), delta.size()));
  out["cost"] = counterfactual_cost(delta, w);
  if (m != nullptr) {
    const Vec transformed = perspective_displacement(m->map, actual,
                                                     hypothetical);
    out["map"] = m->id;
    out["transformed"] = json_vec(transformed);
  }
  return out;
}

inline AnalysisJson exec_reversal(AnalysisReader& r, bool dry) {
  r.allow({"metric_i", "metric_j", "map", "center", "tol"});
  Mat wi, wj;
  r.req_matrix("metric_i", wi);
  r.req_matrix("metric_j", wj);
  const ScenarioMap* m = r.req_map("map");
  Vec center;
  r.req_vec("center", center);
  double tol = 1e-6;
  r.opt_number("tol", tol);
  if (dry || !r.ok()) return {};

  const ReversalResult res =
      find_preference_reversal(wi, m->map, wj, center, tol);
  AnalysisJson out;
  out["map"] = m->id;
  out["verdict"] = res.verdict == ReversalVerdict::Proportional
                       ? "proportional"
                       : "witness_found";
  AnalysisJson ev = AnalysisJson::array();
  for (const double v : res.eigenvalues) ev.push_back(v);
  out["eigenvalues"] = ev;
  if (res.witness.has_value()) {
    const ReversalWitness& w = *res.witness;
    AnalysisJson jw;
    jw["x"] = json_vec(w.x);
    jw["y"] = json_vec(w.y);
    jw["cost_i_x"] = w.cost_i_x;
    jw["cost_i_y"] = w.cost_i_y;
    jw["cost_j_x"] = w.cost_j_x;
    jw["cost_j_y"] = w.cost_j_y;
    out["witness"] = jw;
  }
  return out;
}

inline AnalysisJson exec_election(AnalysisReader& r, bool dry) {
  r.allow({"candidate", "follower"});
  std::vector<const ScenarioAgent*> candidates;
  for (const ScenarioNode* node : r.find_all("candidate")) {
    if (node->tokens.size() != 2) {
      r.fail(node->line, "'candidate' expects one agent id");
      continue;
    }
    const ScenarioAgent* a = r.agent_by_id(node->line, node->tokens[1]);
    if (a != nullptr) candidates.push_back(a);
  }
  std::vector<const ScenarioAgent*> followers;
  for (const ScenarioNode* node : r.find_all("follower")) {
    if (node->tokens.size() != 2) {
      r.fail(node->line, "'follower' expects one agent id");
      continue;
    }
    const ScenarioAgent* a = r.agent_by_id(node->line, node->tokens[1]);
    if (a != nullptr) followers.push_back(a);
  }
  if (candidates.empty()) r.fail(r.spec.line, "needs at least one candidate");
  if (followers.empty()) r.fail(r.spec.line, "needs at least one follower");
  for (const ScenarioAgent* c : candidates) {
    for (const ScenarioAgent* f : followers) {
      bool found = false;
      for (const ScenarioMap& m : r.sc.maps) {
        if (m.map.source == c->agent.id && m.map.target == f->agent.id) {
          found = true;
          break;
        }
      }
      if (!found) {
        r.fail(r.spec.line, "no map from candidate '" + c->agent.id +
                                "' to follower '" + f->agent.id + "'");
      }
    }
  }
  if (dry || !r.ok()) return {};

  std::vector<std::pair<std::string, Vec>> cand_stances;
  for (const ScenarioAgent* c : candidates) {
    cand_stances.emplace_back(c->agent.id, c->agent.current_state);
  }
  std::vector<std::string> follower_ids;
  std::map<std::string, ValuationFunction> valuations;
  for (const ScenarioAgent* f : followers) {
    follower_ids.push_back(f->agent.id);
    valuations.emplace(f->agent.id, f->agent.valuation);
  }
  CrossMaps cross;
  for (const ScenarioMap& m : r.sc.maps) {
    cross.emplace(std::make_pair(m.map.source, m.map.target), m.map);
  }
  std::vector<CandidateScore> scores;
  const std::string winner =
      elect_leader(cand_stances, follower_ids, valuations, cross, &scores);
  AnalysisJson out;
  AnalysisJson js = AnalysisJson::array();
  for (const CandidateScore& s : scores) {
    AnalysisJson j;
    j["id"] = s.id;
    j["score"] = s.score;
    js.push_back(std::move(j));
  }
  out["scores"] = js;
  out["leader"] = winner;
  return out;
}

inline AnalysisJson exec_deviance(AnalysisReader& r, bool dry) {
  r.allow({"member", "map", "prototype", "observer"});
  const ScenarioAgent* member = r.req_agent("member");
  const ScenarioMap* m = r.req_map("map");
  Vec prototype;
  r.req_vec("prototype", prototype);
  const ScenarioAgent* observer = nullptr;
  if (r.find("observer") != nullptr) observer = r.req_agent("observer");
  if (dry || !r.ok()) return {};

  const DevianceReport rep =
      deviance_report(member->agent.current_state, m->map, prototype);
  AnalysisJson out;
  out["member"] = member->agent.id;
  out["in_group_view"] = json_vec(rep.in_group_view);
  out["distance"] = rep.distance;
  out["reward"] = rep.reward;
  out["punishment"] = rep.punishment;
  if (observer != nullptr) {
    out["observer"] = observer->agent.id;
    out["observer_val"] = observer->agent.valuation(rep.in_group_view);
  }
  return out;
}

inline AnalysisJson exec_outgroup(AnalysisReader& r, bool dry) {
  r.allow({"observer", "in", "out", "threshold"});
  const ScenarioAgent* observer = r.req_agent("observer");
  const auto via_pair = [&](const char* key)
      -> std::pair<const ScenarioAgent*, const ScenarioMap*> {
    const ScenarioNode* node = r.find(key);
    if (node == nullptr) {
      r.fail(r.spec.line, std::string("missing '") + key +
                              " <agent> via <map>'");
      return {nullptr, nullptr};
    }
    if (node->tokens.size() != 4 || node->tokens[2] != "via") {
      r.fail(node->line, std::string("'") + key +
                             "' expects '<agent> via <map>'");
      return {nullptr, nullptr};
    }
    return {r.agent_by_id(node->line, node->tokens[1]),
            r.map_by_id(node->line, node->tokens[3])};
  };
  const auto [in_agent, in_map] = via_pair("in");
  const auto [out_agent, out_map] = via_pair("out");
  double threshold = 0.5;
  r.opt_number("threshold", threshold);
  if (dry || !r.ok()) return {};

  const OutgroupContrast contrast = outgroup_contrast(
      observer->agent.valuation, in_map->map, in_agent->agent.current_state,
      out_map->map, out_agent->agent.current_state, threshold);
  AnalysisJson out;
  out["observer"] = observer->agent.id;
  out["in_val"] = contrast.in_val;
  out["out_val"] = contrast.out_val;
  if (std::isnan(contrast.ratio)) {
    out["ratio"] = nullptr;
  } else {
    out["ratio"] = contrast.ratio;
  }
  out["threshold"] = threshold;
  out["out_group"] = contrast.out_group;
  if (!contrast.warning.empty()) {
    out["warnings"] = AnalysisJson::array({contrast.warning});
  }
  return out;
}

inline AnalysisJson exec_marketing(AnalysisReader& r, bool dry) {
  r.allow({"agent", "label", "weight", "eta", "product"});
  const ScenarioAgent* a = r.req_agent("agent");
  const std::string label = r.req_token("label");
  double weight = 0.0;
  double eta = 0.0;
  Vec product;
  r.req_number("weight", weight);
  r.req_number("eta", eta);
  r.req_vec("product", product);
  if (a != nullptr && product.size() > 0 &&
      product.size() != a->agent.space.dim + 1) {
    r.fail(r.spec.line, "product must have dim + 1 = " +
                            std::to_string(a->agent.space.dim + 1) +
                            " components, got " +
                            std::to_string(product.size()));
  }
  if (dry || !r.ok()) return {};

  const MarketingReport rep =
      marketing_intervention(a->agent, label, weight, eta, product);
  AnalysisJson out;
  out["agent"] = a->agent.id;
  out["label"] = label;
  out["weight"] = weight;
  out["eta"] = eta;
  out["product"] = json_vec(product);
  out["val_before"] = rep.val_before;
  out["val_after"] = rep.val_after;
  out["delta"] = rep.val_after - rep.val_before;
  out["expected_delta"] = weight * product(product.size() - 1);
  out["cos_before"] = rep.cos_before;
  out["cos_after"] = rep.cos_after;
  out["goal_after"] = json_vec(rep.agent_after.goal_state);
  return out;
}

inline AnalysisJson exec_emotion(AnalysisReader& r, bool dry) {
  r.allow({"agent", "acceptance", "action", "depth", "gamma", "beta",
           "small_factor", "tol"});
  const ScenarioAgent* a = r.req_agent("agent");
  EmotionInput in;
  r.req_vec("acceptance", in.acceptance_axis);
  for (const ScenarioNode* node : r.find_all("action")) {
    if (node->tokens.size() != 2 || !node->has_block) {
      r.fail(node->line, "action expects '<name> { row ... }'");
      continue;
    }
    ScenarioReader inner;
    inner.file = r.file;
    Mat m;
    if (inner.matrix_block(*node, m, "action '" + node->tokens[1] + "'")) {
      in.actions.push_back(std::move(m));
    }
    for (const std::string& msg : inner.issues) r.issues.push_back(msg);
  }
  r.opt_int("depth", in.search_depth);
  r.opt_number("gamma", in.gamma);
  r.opt_number("beta", in.beta);
  r.opt_number("small_factor", in.activation_threshold_factor);
  double tol = 1e-6;
  r.opt_number("tol", tol);
  if (dry || !r.ok()) return {};

  in.x = a->agent.current_state;
  in.g = a->agent.goal_state;
  const EmotionReport rep = classify_emotion(in, tol);
  AnalysisJson out;
  out["agent"] = a->agent.id;
  out["verdict"] = to_string(rep.verdict);
  out["distance"] = rep.distance;
  out["acceptance"] = rep.acceptance;
  out["gradient"] = json_vec(rep.gradient);
  return out;
}

inline AnalysisJson exec_lifecycle(AnalysisReader& r, bool dry) {
  r.allow({"being", "steps", "decay", "threshold"});
  const ScenarioNode* being_node = r.find("being");
  const ScenarioBeing* being = nullptr;
  if (being_node == nullptr || being_node->tokens.size() != 2) {
    r.fail(r.spec.line, "missing 'being <id>'");
  } else {
    being = r.sc.find_being(being_node->tokens[1]);
    if (being == nullptr) {
      r.fail(being_node->line,
             "unknown being '" + being_node->tokens[1] + "'");
    }
  }
  int steps = 0;
  double decay = 1.0;
  double threshold = existence_threshold();
  if (r.find("steps") == nullptr) {
    r.fail(r.spec.line, "missing 'steps <n>'");
  } else {
    r.opt_int("steps", steps);
    if (r.ok() && steps < 1) r.fail(r.spec.line, "steps must be >= 1");
  }
  r.opt_number("decay", decay);
  r.opt_number("threshold", threshold);
  if (dry || !r.ok()) return {};

  std::vector<std::string> population;
  for (const ScenarioAgent& a : r.sc.agents) population.push_back(a.agent.id);
  const LifecycleUpdate update = [decay](const std::string&, const Vec& v) {
    return Vec(decay * v);
  };
  AbstractBeing b = being->being;
  LifecycleRecord record;
  for (int step = 0; step < steps; ++step) {
    b = step_lifecycle(b, population, update, step, record, threshold);
  }
  AnalysisJson out;
  out["being"] = being->being.id;
  out["threshold"] = threshold;
  out["observations"] = record.norms.size();
  if (record.birth_step.has_value()) {
    out["birth_step"] = *record.birth_step;
  } else {
    out["birth_step"] = nullptr;
  }
  if (record.death_step.has_value()) {
    out["death_step"] = *record.death_step;
  } else {
    out["death_step"] = nullptr;
  }
  return out;
}

inline AnalysisJson exec_motivational_convergence(AnalysisReader& r,
                                                  bool dry) {
  r.allow({"agent", "limit", "adopted", "steps", "beta_scale"});
  const ScenarioAgent* a = r.req_agent("agent");
  Vec limit, adopted;
  r.req_vec("limit", limit);
  r.req_vec("adopted", adopted);
  int steps = 100;
  double beta_scale = 1.0;
  r.opt_int("steps", steps);
  r.opt_number("beta_scale", beta_scale);
  if (r.find("steps") != nullptr && r.ok() && steps < 1) {
    r.fail(r.spec.line, "steps must be >= 1");
  }
  if (dry || !r.ok()) return {};

  const std::vector<Vec> sequence(static_cast<std::size_t>(steps), adopted);
  const auto cosines = track_motivational_convergence(
      a->agent, sequence, limit,
      [beta_scale](int k) { return beta_scale * k; });
  AnalysisJson out;
  out["agent"] = a->agent.id;
  out["steps"] = steps;
  out["first_cos"] = cosines.front();
  out["last_cos"] = cosines.back();
  out["converged"] = cosines.back() >= 1.0 - 1e-3;
  return out;
}

inline AnalysisJson exec_valuation_convergence(AnalysisReader& r, bool dry) {
  r.allow({"leader", "leader_val", "initial", "alpha", "seed", "max_steps",
           "replicates"});
  const ScenarioAgent* leader = r.req_agent("leader");
  r.require_graph();
  double leader_val = 0.0;
  r.req_number("leader_val", leader_val);
  std::map<std::string, double> initial;
  for (const ScenarioNode* node : r.find_all("initial")) {
    double v = 0.0;
    if (node->tokens.size() != 3 || !parse_number(node->tokens[2], v)) {
      r.fail(node->line, "initial expects '<agent> <value>'");
      continue;
    }
    if (r.agent_by_id(node->line, node->tokens[1]) != nullptr) {
      initial[node->tokens[1]] = v;
    }
  }
  ValuationUpdateRule rule;
  r.opt_number("alpha", rule.alpha);
  SimulationConfig cfg;
  cfg.max_steps = 50;
  r.opt_uint64("seed", cfg.seed);
  r.opt_int("max_steps", cfg.max_steps);
  r.opt_int("replicates", cfg.replicates);
  if (dry || !r.ok()) return {};

  const ValuationConvergenceReport rep = run_valuation_convergence(
      build_influence_graph(r.sc), leader->agent.id, leader_val, initial,
      rule, cfg);
  AnalysisJson out;
  out["leader"] = leader->agent.id;
  out["leader_val"] = leader_val;
  out["hypothesis_holds"] = rep.hypothesis_holds;
  out["monotone"] = rep.monotone;
  out["strict_on_leader_lineage"] = rep.strict_on_leader_lineage;
  out["event_count"] = rep.events.size();
  AnalysisJson finals;
  for (const auto& [id, v] : rep.final_vals) finals[id] = v;
  out["final_vals"] = finals;
  if (!rep.warnings.empty()) {
    AnalysisJson w = AnalysisJson::array();
    for (const std::string& s : rep.warnings) w.push_back(s);
    out["warnings"] = w;
  }
  return out;
}

inline AnalysisJson exec_coherence(AnalysisReader& r, bool dry) {
  r.allow({"forward", "backward", "input", "eps", "k"});
  const ScenarioMap* fwd = r.req_map("forward");
  const ScenarioMap* bwd = r.req_map("backward");
  Vec input;
  r.req_vec("input", input);
  double eps = 0.0;
  r.req_number("eps", eps);
  int k = 1;
  r.opt_int("k", k);
  if (dry || !r.ok()) return {};

  const RoundTripReport rep = round_trip_bound(fwd->map, bwd->map, input,
                                               eps, k);
  AnalysisJson out;
  out["eps"] = rep.eps;
  out["k"] = rep.k;
  out["applicable"] = rep.applicable;
  if (rep.applicable) {
    out["observed"] = rep.observed;
    out["one_step_bound"] = rep.one_step_bound;
    out["k_step_bound"] = rep.k_step_bound;
    out["holds"] = rep.holds;
  } else {
    out["warnings"] = AnalysisJson::array(
        {"NOT_APPLICABLE: an iterate violated the consistency premises"});
  }
  return out;
}

inline AnalysisJson exec_activation(AnalysisReader& r, bool dry) {
  r.allow({"p", "edge", "tail"});
  double p = 0.0;
  const ScenarioNode* edge_node = r.find("edge");
  if (edge_node != nullptr) {
    if (r.find("p") != nullptr) {
      r.fail(edge_node->line, "give either 'p' or 'edge', not both");
    }
    if (edge_node->tokens.size() != 4 || edge_node->tokens[2] != "->") {
      r.fail(edge_node->line, "edge expects '<from> -> <to>'");
    } else {
      bool found = false;
      for (const ScenarioEdge& e : r.sc.edges) {
        if (e.from == edge_node->tokens[1] && e.to == edge_node->tokens[3]) {
          p = e.probability;
          found = true;
          break;
        }
      }
      if (!found) {
        r.fail(edge_node->line, "no edge " + edge_node->tokens[1] + " -> " +
                                    edge_node->tokens[3] + " in the graph");
      }
    }
  } else if (!r.req_number("p", p)) {
    // issue already recorded
  }
  std::vector<int> tails;
  for (const ScenarioNode* node : r.find_all("tail")) {
    long long t = 0;
    if (node->tokens.size() != 2 || !parse_integer(node->tokens[1], t)) {
      r.fail(node->line, "'tail' expects one integer");
      continue;
    }
    tails.push_back(static_cast<int>(t));
  }
  if (dry || !r.ok()) return {};

  AnalysisJson out;
  out["p"] = p;
  out["expected_time"] = expected_activation_time(p);
  AnalysisJson jt = AnalysisJson::array();
  for (const int t : tails) {
    AnalysisJson e;
    e["t"] = t;
    e["not_fired_probability"] = activation_tail(p, t);
    jt.push_back(std::move(e));
  }
  out["tails"] = jt;
  return out;
}

using AnalysisExec = AnalysisJson (*)(AnalysisReader&, bool);

inline const std::map<std::string, AnalysisExec>& analysis_registry() {
  static const std::map<std::string, AnalysisExec> registry = {
      {"interpret", exec_interpret},
      {"gradient", exec_gradient},
      {"alignment", exec_alignment},
      {"understanding", exec_understanding},
      {"consistency", exec_consistency},
      {"blindness", exec_blindness},
      {"propagate", exec_propagate},
      {"compose", exec_compose},
      {"leadership", exec_leadership},
      {"reception", exec_reception},
      {"goal_adoption", exec_goal_adoption},
      {"coordination", exec_coordination},
      {"persuasion", exec_persuasion},
      {"hull", exec_hull},
      {"counterfactual", exec_counterfactual},
      {"reversal", exec_reversal},
      {"election", exec_election},
      {"deviance", exec_deviance},
      {"outgroup", exec_outgroup},
      {"marketing", exec_marketing},
      {"emotion", exec_emotion},
      {"lifecycle", exec_lifecycle},
      {"motivational_convergence", exec_motivational_convergence},
      {"valuation_convergence", exec_valuation_convergence},
      {"coherence", exec_coherence},
      {"activation", exec_activation},
  };
  return registry;
}

inline void run_one_analysis(const Scenario& sc, const AnalysisSpec& spec,
                             const std::string& file, bool dry,
                             std::vector<std::string>& issues,
                             AnalysisJson* out) {
  const auto it = analysis_registry().find(spec.kind);
  if (it == analysis_registry().end()) {
    issues.push_back(file + ":" + std::to_string(spec.line) +
                     ": unknown analysis kind '" + spec.kind + "'");
    return;
  }
  AnalysisReader reader(sc, spec, file, issues);
  AnalysisJson result = it->second(reader, dry);
  if (!dry && reader.ok() && out != nullptr) {
    AnalysisJson block;
    block["name"] = spec.name;
    block["kind"] = spec.kind;
    for (auto& [key, value] : result.items()) {
      block[key] = std::move(value);
    }
    *out = std::move(block);
  }
}

}  // namespace detail

// Validates every analysis block, returning all problems found (empty means
// the blocks are executable).
inline std::vector<std::string> check_analyses(
    const Scenario& sc, const std::string& file = "<inline>") {
  std::vector<std::string> issues;
  for (const AnalysisSpec& spec : sc.analyses) {
    detail::run_one_analysis(sc, spec, file, /*dry=*/true, issues, nullptr);
  }
  return issues;
}

// Executes one analysis block (validating it first).
inline AnalysisJson run_analysis(const Scenario& sc, const AnalysisSpec& spec,
                                 const std::string& file = "<inline>") {
  std::vector<std::string> issues;
  AnalysisJson out;
  detail::run_one_analysis(sc, spec, file, /*dry=*/false, issues, &out);
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  return out;
}

// Builds the full run report: header identifying the inputs, then one block
// per analysis (optionally restricted to a single name).
inline AnalysisJson run_report(const LoadedScenario& ls,
                               const std::string& only_name = "") {
  std::vector<std::string> issues;
  AnalysisJson blocks = AnalysisJson::array();
  bool matched = only_name.empty();
  const std::string file = ls.path.empty() ? "<inline>" : ls.path;
  for (const AnalysisSpec& spec : ls.scenario.analyses) {
    if (!only_name.empty() && spec.name != only_name) continue;
    matched = true;
    AnalysisJson block;
    detail::run_one_analysis(ls.scenario, spec, file, /*dry=*/false, issues,
                             &block);
    if (issues.empty()) blocks.push_back(std::move(block));
  }
  if (!issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  if (!matched) {
    throw ValidationError(
        {file + ": no analysis named '" + only_name + "'"});
  }
  AnalysisJson report;
  report["scenario_path"] = ls.path;
  report["scenario_hash"] = ls.hash_hex;
  report["engine_version"] = kEngineVersion;
  report["scenario_format_version"] = kScenarioFormatVersion;
  report["analyses"] = std::move(blocks);
  return report;
}

}  // namespace vsdyn
