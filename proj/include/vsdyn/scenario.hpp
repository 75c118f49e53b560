#pragma once
// Scenario files: a hierarchical plain-text format describing agents, maps,
// beings, an influence graph, simulation settings, and analysis requests.
// This header provides the tokenizer, the block-tree parser, typed extraction
// with exhaustive error collection, the canonical serializer, structural
// equality, and the content hash embedded in reports.
//
// Grammar sketch (see docs/scenario_format.md for the full schema):
//   version 1
//   agent A { dim 3  labels a b c  valuation sum  state 1 0 0  goal 0 1 0 }
//   map T from A to B { row 1 0 0   row 0 1 0 }
//   being X { at A 0.9 0.6 0.2 }
//   graph { edge A -> B p 0.5 map T }
//   simulation { seed 42  max_steps 50  replicates 3  origin A  being X }
//   analysis <kind> <name> { ...kind-specific keys... }
// Statement heads are keywords; `#` starts a comment; blocks nest with braces.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vsdyn/agents.hpp"
#include "vsdyn/errors.hpp"
#include "vsdyn/linalg.hpp"
#include "vsdyn/network.hpp"
#include "vsdyn/version.hpp"

namespace vsdyn {

// Malformed document structure: lexing or block nesting failed. The message
// lists every issue found before the structure became unrecoverable.
struct ParseError : Error {
  std::vector<std::string> issues;
  explicit ParseError(std::vector<std::string> list)
      : Error(join(list)), issues(std::move(list)) {}
  static std::string join(const std::vector<std::string>& list) {
    std::string all;
    for (const std::string& s : list) {
      if (!all.empty()) all += '\n';
      all += s;
    }
    return all;
  }
};

// Structurally well-formed but semantically invalid scenario. Carries every
// validation failure, not only the first.
struct ValidationError : Error {
  std::vector<std::string> issues;
  explicit ValidationError(std::vector<std::string> list)
      : Error(ParseError::join(list)), issues(std::move(list)) {}
};

// One parsed statement: a head token, its argument tokens, and an optional
// brace-delimited block of child statements.
struct ScenarioNode {
  int line = 0;
  std::vector<std::string> tokens;
  std::vector<ScenarioNode> children;
  bool has_block = false;

  const std::string& head() const { return tokens.front(); }
};

struct ScenarioAgent {
  Agent agent;
  int line = 0;
};

struct ScenarioMap {
  std::string id;
  InterpretationMap map;
  int line = 0;
};

struct ScenarioBeing {
  AbstractBeing being;
  int line = 0;
};

struct ScenarioEdge {
  std::string from;
  std::string to;
  double probability = 1.0;
  std::string map_id;
  int line = 0;
};

// Simulation settings plus the origin binding used by `simulate`.
struct ScenarioSimulation {
  SimulationConfig config;
  std::string origin;
  std::string being_id;
  int line = 0;
};

struct AnalysisSpec {
  std::string kind;
  std::string name;
  int line = 0;
  ScenarioNode node;  // retained for the analysis compiler
};

struct Scenario {
  int version = kScenarioFormatVersion;
  std::vector<ScenarioAgent> agents;
  std::vector<ScenarioMap> maps;
  std::vector<ScenarioBeing> beings;
  std::vector<ScenarioEdge> edges;
  bool has_graph = false;
  std::optional<ScenarioSimulation> simulation;
  std::vector<AnalysisSpec> analyses;

  const ScenarioAgent* find_agent(const std::string& id) const {
    for (const auto& a : agents)
      if (a.agent.id == id) return &a;
    return nullptr;
  }
  const ScenarioMap* find_map(const std::string& id) const {
    for (const auto& m : maps)
      if (m.id == id) return &m;
    return nullptr;
  }
  const ScenarioBeing* find_being(const std::string& id) const {
    for (const auto& b : beings)
      if (b.being.id == id) return &b;
    return nullptr;
  }
};

namespace detail {

struct Token {
  std::string text;
  int line = 0;
};

inline std::vector<Token> tokenize_scenario(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  std::string current;
  int current_line = 1;
  const auto flush = [&] {
    if (!current.empty()) {
      out.push_back({current, current_line});
      current.clear();
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      flush();
      ++line;
      continue;
    }
    if (c == '#') {  // comment to end of line
      flush();
      while (i + 1 < text.size() && text[i + 1] != '\n') ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      flush();
      continue;
    }
    if (c == '{' || c == '}') {
      flush();
      out.push_back({std::string(1, c), line});
      continue;
    }
    if (current.empty()) current_line = line;
    current += c;
  }
  flush();
  return out;
}

// Grows a statement list until the closing brace (or end of input at depth 0).
inline std::vector<ScenarioNode> parse_nodes(const std::vector<Token>& tokens,
                                             std::size_t& pos, int depth,
                                             const std::string& file,
                                             std::vector<std::string>& issues) {
  std::vector<ScenarioNode> nodes;
  while (pos < tokens.size()) {
    if (tokens[pos].text == "}") {
      if (depth == 0) {
        issues.push_back(file + ":" + std::to_string(tokens[pos].line) +
                         ": unmatched '}'");
        ++pos;
        continue;
      }
      return nodes;
    }
    if (tokens[pos].text == "{") {
      issues.push_back(file + ":" + std::to_string(tokens[pos].line) +
                       ": block without a statement head");
      ++pos;
      std::size_t ignored_depth = 1;
      while (pos < tokens.size() && ignored_depth > 0) {
        if (tokens[pos].text == "{") ++ignored_depth;
        if (tokens[pos].text == "}") --ignored_depth;
        ++pos;
      }
      continue;
    }
    ScenarioNode node;
    node.line = tokens[pos].line;
    const int statement_line = tokens[pos].line;
    while (pos < tokens.size() && tokens[pos].text != "{" &&
           tokens[pos].text != "}" && tokens[pos].line == statement_line) {
      node.tokens.push_back(tokens[pos].text);
      ++pos;
    }
    if (pos < tokens.size() && tokens[pos].text == "{") {
      node.has_block = true;
      ++pos;
      node.children = parse_nodes(tokens, pos, depth + 1, file, issues);
      if (pos >= tokens.size()) {
        issues.push_back(file + ":" + std::to_string(statement_line) +
                         ": unterminated block (missing '}')");
      } else {
        ++pos;  // consume '}'
      }
    }
    nodes.push_back(std::move(node));
  }
  if (depth > 0) {
    issues.push_back(file + ": unexpected end of input inside a block");
  }
  return nodes;
}

inline bool parse_number(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

inline bool parse_integer(const std::string& s, long long& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

// Shared error-collecting context for typed extraction.
struct ScenarioReader {
  std::string file;
  std::vector<std::string> issues;

  void fail(int line, const std::string& message) {
    issues.push_back(file + ":" + std::to_string(line) + ": " + message);
  }

  bool number(const ScenarioNode& node, std::size_t index, double& out,
              const std::string& what) {
    if (index >= node.tokens.size()) {
      fail(node.line, what + ": missing value");
      return false;
    }
    if (!parse_number(node.tokens[index], out)) {
      fail(node.line, what + ": '" + node.tokens[index] + "' is not a number");
      return false;
    }
    return true;
  }

  bool integer(const ScenarioNode& node, std::size_t index, long long& out,
               const std::string& what) {
    if (index >= node.tokens.size()) {
      fail(node.line, what + ": missing value");
      return false;
    }
    if (!parse_integer(node.tokens[index], out)) {
      fail(node.line,
           what + ": '" + node.tokens[index] + "' is not an integer");
      return false;
    }
    return true;
  }

  // Single-value statements (`dim 3`, `seed 42`) reject trailing tokens so a
  // collapsed line like `dim 1 valuation norm` cannot pass silently.
  bool scalar_number(const ScenarioNode& node, double& out,
                     const std::string& what) {
    if (node.tokens.size() != 2) {
      fail(node.line, what + ": expected exactly one value");
      return false;
    }
    return number(node, 1, out, what);
  }

  bool scalar_integer(const ScenarioNode& node, long long& out,
                      const std::string& what) {
    if (node.tokens.size() != 2) {
      fail(node.line, what + ": expected exactly one value");
      return false;
    }
    return integer(node, 1, out, what);
  }

  // Parses tokens[from..] as a vector of doubles.
  bool vector_tail(const ScenarioNode& node, std::size_t from, Vec& out,
                   const std::string& what) {
    if (node.tokens.size() <= from) {
      fail(node.line, what + ": expected at least one component");
      return false;
    }
    out.resize(static_cast<Eigen::Index>(node.tokens.size() - from));
    bool ok = true;
    for (std::size_t i = from; i < node.tokens.size(); ++i) {
      double v = 0.0;
      if (!parse_number(node.tokens[i], v)) {
        fail(node.line,
             what + ": '" + node.tokens[i] + "' is not a number");
        ok = false;
        v = 0.0;
      }
      out(static_cast<Eigen::Index>(i - from)) = v;
    }
    return ok;
  }

  // Parses a block of `row ...` children into a matrix.
  bool matrix_block(const ScenarioNode& node, Mat& out,
                    const std::string& what) {
    std::vector<Vec> rows;
    bool ok = true;
    for (const ScenarioNode& child : node.children) {
      if (child.head() != "row") {
        fail(child.line, what + ": expected 'row', found '" + child.head() +
                             "'");
        ok = false;
        continue;
      }
      Vec r;
      if (!vector_tail(child, 1, r, what + " row")) {
        ok = false;
        continue;
      }
      if (!rows.empty() && rows.front().size() != r.size()) {
        fail(child.line, what + ": ragged rows (" +
                             std::to_string(r.size()) + " vs " +
                             std::to_string(rows.front().size()) +
                             " columns)");
        ok = false;
        continue;
      }
      rows.push_back(std::move(r));
    }
    if (rows.empty()) {
      fail(node.line, what + ": no rows");
      return false;
    }
    if (!ok) return false;
    out.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return true;
  }
};

inline void read_agent(ScenarioReader& r, const ScenarioNode& node,
                       Scenario& sc) {
  if (node.tokens.size() != 2) {
    r.fail(node.line, "agent: expected 'agent <id> { ... }'");
    return;
  }
  ScenarioAgent entry;
  entry.line = node.line;
  entry.agent.id = node.tokens[1];
  if (sc.find_agent(entry.agent.id) != nullptr) {
    r.fail(node.line, "agent '" + entry.agent.id + "' declared twice");
    return;
  }

  long long dim = 0;
  std::string valuation_kind;
  Vec valuation_weights;
  std::optional<Mat> metric;
  std::optional<Vec> state, goal;
  std::vector<std::string> labels;
  for (const ScenarioNode& child : node.children) {
    const std::string& key = child.head();
    if (key == "dim") {
      if (!r.scalar_integer(child, dim, "agent dim")) dim = 0;
    } else if (key == "labels") {
      labels.assign(child.tokens.begin() + 1, child.tokens.end());
    } else if (key == "valuation") {
      if (child.tokens.size() < 2) {
        r.fail(child.line, "valuation: expected a kind");
        continue;
      }
      valuation_kind = child.tokens[1];
      if ((valuation_kind == "weighted_sum" || valuation_kind == "linear") &&
          !r.vector_tail(child, 2, valuation_weights, "valuation weights")) {
        valuation_kind.clear();
      }
    } else if (key == "metric") {
      Mat m;
      if (r.matrix_block(child, m, "metric")) metric = std::move(m);
    } else if (key == "state") {
      Vec v;
      if (r.vector_tail(child, 1, v, "state")) state = std::move(v);
    } else if (key == "goal") {
      Vec v;
      if (r.vector_tail(child, 1, v, "goal")) goal = std::move(v);
    } else {
      r.fail(child.line, "agent: unknown key '" + key + "'");
    }
  }

  if (dim < 1) {
    r.fail(node.line, "agent '" + entry.agent.id + "': dim must be >= 1");
    return;
  }
  entry.agent.space.dim = static_cast<int>(dim);
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(dim)) {
    r.fail(node.line, "agent '" + entry.agent.id + "': " +
                          std::to_string(labels.size()) + " labels for dim " +
                          std::to_string(dim));
  }
  entry.agent.space.basis_labels = std::move(labels);

  if (valuation_kind.empty() || valuation_kind == "sum") {
    entry.agent.valuation = ValuationFunction::sum(static_cast<int>(dim));
  } else if (valuation_kind == "weighted_sum" || valuation_kind == "linear") {
    if (valuation_weights.size() != dim) {
      r.fail(node.line, "agent '" + entry.agent.id + "': " +
                            std::to_string(valuation_weights.size()) +
                            " valuation weights for dim " +
                            std::to_string(dim));
      return;
    }
    entry.agent.valuation = valuation_kind == "linear"
                                ? ValuationFunction::linear(valuation_weights)
                                : ValuationFunction::weighted_sum(
                                      valuation_weights);
  } else if (valuation_kind == "norm") {
    if (metric.has_value()) {
      if (metric->rows() != dim || metric->cols() != dim) {
        r.fail(node.line, "agent '" + entry.agent.id +
                              "': metric shape does not match dim");
        return;
      }
      try {
        entry.agent.valuation = ValuationFunction::norm_with_metric(*metric);
      } catch (const Error& e) {
        r.fail(node.line,
               "agent '" + entry.agent.id + "': " + std::string(e.what()));
        return;
      }
    } else {
      entry.agent.valuation = ValuationFunction::norm();
    }
  } else {
    r.fail(node.line, "agent '" + entry.agent.id + "': unknown valuation '" +
                          valuation_kind + "'");
    return;
  }
  if (metric.has_value() && valuation_kind != "norm") {
    r.fail(node.line, "agent '" + entry.agent.id +
                          "': metric requires a norm valuation");
  }

  entry.agent.current_state = state.value_or(Vec::Zero(dim));
  entry.agent.goal_state = goal.value_or(Vec::Zero(dim));
  if (entry.agent.current_state.size() != dim) {
    r.fail(node.line, "agent '" + entry.agent.id +
                          "': state does not match dim");
    return;
  }
  if (entry.agent.goal_state.size() != dim) {
    r.fail(node.line,
           "agent '" + entry.agent.id + "': goal does not match dim");
    return;
  }
  sc.agents.push_back(std::move(entry));
}

inline void read_map(ScenarioReader& r, const ScenarioNode& node,
                     Scenario& sc) {
  // map <id> from <A> to <B> { row ... }
  if (node.tokens.size() != 6 || node.tokens[2] != "from" ||
      node.tokens[4] != "to") {
    r.fail(node.line, "map: expected 'map <id> from <A> to <B> { ... }'");
    return;
  }
  ScenarioMap entry;
  entry.line = node.line;
  entry.id = node.tokens[1];
  entry.map.source = node.tokens[3];
  entry.map.target = node.tokens[5];
  if (sc.find_map(entry.id) != nullptr) {
    r.fail(node.line, "map '" + entry.id + "' declared twice");
    return;
  }
  if (!r.matrix_block(node, entry.map.matrix, "map '" + entry.id + "'")) {
    return;
  }
  sc.maps.push_back(std::move(entry));
}

inline void read_being(ScenarioReader& r, const ScenarioNode& node,
                       Scenario& sc) {
  if (node.tokens.size() != 2) {
    r.fail(node.line, "being: expected 'being <id> { ... }'");
    return;
  }
  ScenarioBeing entry;
  entry.line = node.line;
  entry.being.id = node.tokens[1];
  if (sc.find_being(entry.being.id) != nullptr) {
    r.fail(node.line, "being '" + entry.being.id + "' declared twice");
    return;
  }
  for (const ScenarioNode& child : node.children) {
    if (child.head() != "at" || child.tokens.size() < 2) {
      r.fail(child.line, "being: expected 'at <agent> <components...>'");
      continue;
    }
    const std::string& host = child.tokens[1];
    if (entry.being.representations.count(host)) {
      r.fail(child.line, "being '" + entry.being.id +
                             "': duplicate representation at '" + host + "'");
      continue;
    }
    Vec v;
    if (r.vector_tail(child, 2, v, "representation at '" + host + "'")) {
      entry.being.representations.emplace(host, std::move(v));
    }
  }
  sc.beings.push_back(std::move(entry));
}

inline void read_graph(ScenarioReader& r, const ScenarioNode& node,
                       Scenario& sc) {
  if (sc.has_graph) {
    r.fail(node.line, "graph declared twice");
    return;
  }
  sc.has_graph = true;
  for (const ScenarioNode& child : node.children) {
    // edge <A> -> <B> p <prob> map <id>
    if (child.head() != "edge") {
      r.fail(child.line, "graph: unknown key '" + child.head() + "'");
      continue;
    }
    if (child.tokens.size() != 8 || child.tokens[2] != "->" ||
        child.tokens[4] != "p" || child.tokens[6] != "map") {
      r.fail(child.line,
             "graph: expected 'edge <A> -> <B> p <prob> map <id>'");
      continue;
    }
    ScenarioEdge edge;
    edge.line = child.line;
    edge.from = child.tokens[1];
    edge.to = child.tokens[3];
    edge.map_id = child.tokens[7];
    if (!r.number(child, 5, edge.probability, "edge probability")) continue;
    sc.edges.push_back(std::move(edge));
  }
}

inline void read_simulation(ScenarioReader& r, const ScenarioNode& node,
                            Scenario& sc) {
  if (sc.simulation.has_value()) {
    r.fail(node.line, "simulation declared twice");
    return;
  }
  ScenarioSimulation sim;
  sim.line = node.line;
  for (const ScenarioNode& child : node.children) {
    const std::string& key = child.head();
    long long i = 0;
    double d = 0.0;
    if (key == "seed") {
      if (r.scalar_integer(child, i, "seed")) {
        sim.config.seed = static_cast<std::uint64_t>(i);
      }
    } else if (key == "max_steps") {
      if (r.scalar_integer(child, i, "max_steps")) {
        sim.config.max_steps = static_cast<int>(i);
      }
    } else if (key == "replicates") {
      if (r.scalar_integer(child, i, "replicates")) {
        sim.config.replicates = static_cast<int>(i);
      }
    } else if (key == "adoption_threshold") {
      if (r.scalar_number(child, d, "adoption_threshold")) {
        sim.config.adoption_threshold = d;
      }
    } else if (key == "record_events") {
      if (child.tokens.size() != 2 ||
          (child.tokens[1] != "true" && child.tokens[1] != "false")) {
        r.fail(child.line, "record_events: expected true or false");
      } else {
        sim.config.record_events = child.tokens[1] == "true";
      }
    } else if (key == "origin") {
      if (child.tokens.size() != 2) {
        r.fail(child.line, "origin: expected an agent id");
      } else {
        sim.origin = child.tokens[1];
      }
    } else if (key == "being") {
      if (child.tokens.size() != 2) {
        r.fail(child.line, "being: expected a being id");
      } else {
        sim.being_id = child.tokens[1];
      }
    } else {
      r.fail(child.line, "simulation: unknown key '" + key + "'");
    }
  }
  sc.simulation = std::move(sim);
}

inline void validate_scenario(ScenarioReader& r, const Scenario& sc) {
  if (sc.agents.empty()) {
    r.issues.push_back(r.file + ": scenario declares no agents");
  }
  for (const ScenarioMap& m : sc.maps) {
    const ScenarioAgent* src = sc.find_agent(m.map.source);
    const ScenarioAgent* dst = sc.find_agent(m.map.target);
    if (src == nullptr) {
      r.fail(m.line, "map '" + m.id + "': unknown source agent '" +
                         m.map.source + "'");
    } else if (m.map.matrix.cols() != src->agent.space.dim) {
      r.fail(m.line, "map '" + m.id + "': " +
                         std::to_string(m.map.matrix.cols()) +
                         " columns for source dim " +
                         std::to_string(src->agent.space.dim));
    }
    if (dst == nullptr) {
      r.fail(m.line,
             "map '" + m.id + "': unknown target agent '" + m.map.target +
                 "'");
    } else if (m.map.matrix.rows() != dst->agent.space.dim) {
      r.fail(m.line, "map '" + m.id + "': " +
                         std::to_string(m.map.matrix.rows()) +
                         " rows for target dim " +
                         std::to_string(dst->agent.space.dim));
    }
  }
  for (const ScenarioBeing& b : sc.beings) {
    for (const auto& [host, v] : b.being.representations) {
      const ScenarioAgent* host_agent = sc.find_agent(host);
      if (host_agent == nullptr) {
        r.fail(b.line, "being '" + b.being.id + "': unknown host agent '" +
                           host + "'");
      } else if (v.size() != host_agent->agent.space.dim) {
        r.fail(b.line, "being '" + b.being.id + "': representation at '" +
                           host + "' has " + std::to_string(v.size()) +
                           " components for dim " +
                           std::to_string(host_agent->agent.space.dim));
      }
    }
  }
  for (const ScenarioEdge& e : sc.edges) {
    if (sc.find_agent(e.from) == nullptr) {
      r.fail(e.line, "edge: unknown agent '" + e.from + "'");
    }
    if (sc.find_agent(e.to) == nullptr) {
      r.fail(e.line, "edge: unknown agent '" + e.to + "'");
    }
    if (!(e.probability > 0.0) || e.probability > 1.0) {
      r.fail(e.line, "edge " + e.from + " -> " + e.to +
                         ": probability must lie in (0, 1]");
    }
    const ScenarioMap* m = sc.find_map(e.map_id);
    if (m == nullptr) {
      r.fail(e.line, "edge: unknown map '" + e.map_id + "'");
    } else if (m->map.source != e.from || m->map.target != e.to) {
      r.fail(e.line, "edge " + e.from + " -> " + e.to + ": map '" + e.map_id +
                         "' is declared from '" + m->map.source + "' to '" +
                         m->map.target + "'");
    }
  }
  if (sc.simulation.has_value()) {
    const ScenarioSimulation& sim = *sc.simulation;
    if (sim.config.max_steps < 1) {
      r.fail(sim.line, "simulation: max_steps must be >= 1");
    }
    if (sim.config.replicates < 1) {
      r.fail(sim.line, "simulation: replicates must be >= 1");
    }
    if (sim.config.adoption_threshold < 0.0) {
      r.fail(sim.line, "simulation: adoption_threshold must be >= 0");
    }
    if (!sim.origin.empty() && sc.find_agent(sim.origin) == nullptr) {
      r.fail(sim.line, "simulation: unknown origin '" + sim.origin + "'");
    }
    if (!sim.being_id.empty() && sc.find_being(sim.being_id) == nullptr) {
      r.fail(sim.line, "simulation: unknown being '" + sim.being_id + "'");
    }
  }
  std::set<std::string> analysis_names;
  for (const AnalysisSpec& a : sc.analyses) {
    if (!analysis_names.insert(a.name).second) {
      r.fail(a.line, "analysis name '" + a.name + "' used twice");
    }
  }
}

}  // namespace detail

// Parses and validates a scenario document. Structural failures raise
// ParseError; semantic failures raise ValidationError with every issue found.
inline Scenario parse_scenario(const std::string& text,
                               const std::string& file = "<inline>") {
  std::vector<std::string> structure_issues;
  const auto tokens = detail::tokenize_scenario(text);
  std::size_t pos = 0;
  const auto nodes =
      detail::parse_nodes(tokens, pos, 0, file, structure_issues);
  if (!structure_issues.empty()) {
    throw ParseError(std::move(structure_issues));
  }

  detail::ScenarioReader reader;
  reader.file = file;
  Scenario sc;
  bool saw_version = false;
  for (const ScenarioNode& node : nodes) {
    const std::string& head = node.head();
    if (head == "version") {
      long long v = 0;
      if (reader.scalar_integer(node, v, "version")) {
        sc.version = static_cast<int>(v);
        saw_version = true;
        if (sc.version != kScenarioFormatVersion) {
          reader.fail(node.line, "unsupported scenario version " +
                                     std::to_string(sc.version) +
                                     " (engine speaks version " +
                                     std::to_string(kScenarioFormatVersion) +
                                     ")");
        }
      }
    } else if (head == "agent") {
      detail::read_agent(reader, node, sc);
    } else if (head == "map") {
      detail::read_map(reader, node, sc);
    } else if (head == "being") {
      detail::read_being(reader, node, sc);
    } else if (head == "graph") {
      detail::read_graph(reader, node, sc);
    } else if (head == "simulation") {
      detail::read_simulation(reader, node, sc);
    } else if (head == "analysis") {
      if (node.tokens.size() < 2 || node.tokens.size() > 3) {
        reader.fail(node.line, "analysis: expected 'analysis <kind> [name]'");
        continue;
      }
      AnalysisSpec spec;
      spec.kind = node.tokens[1];
      spec.name = node.tokens.size() == 3
                      ? node.tokens[2]
                      : spec.kind + "_" + std::to_string(sc.analyses.size());
      spec.line = node.line;
      spec.node = node;
      sc.analyses.push_back(std::move(spec));
    } else {
      reader.fail(node.line, "unknown top-level statement '" + head + "'");
    }
  }
  if (!saw_version) {
    reader.issues.push_back(reader.file + ": missing 'version' statement");
  }
  detail::validate_scenario(reader, sc);
  if (!reader.issues.empty()) {
    throw ValidationError(std::move(reader.issues));
  }
  return sc;
}

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void serialize_vec(std::ostringstream& out, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out << ' ' << format_number(v(i));
  }
}

inline void serialize_node(std::ostringstream& out, const ScenarioNode& node,
                           int indent) {
  out << std::string(static_cast<std::size_t>(indent), ' ');
  for (std::size_t i = 0; i < node.tokens.size(); ++i) {
    if (i > 0) out << ' ';
    out << node.tokens[i];
  }
  if (node.has_block) {
    out << " {\n";
    for (const ScenarioNode& child : node.children) {
      serialize_node(out, child, indent + 2);
    }
    out << std::string(static_cast<std::size_t>(indent), ' ') << "}";
  }
  out << '\n';
}

}  // namespace detail

// Canonical text form: parse(serialize_scenario(sc)) is structurally equal
// to sc. Numbers are emitted at full precision.
inline std::string serialize_scenario(const Scenario& sc) {
  std::ostringstream out;
  out << "version " << sc.version << "\n";
  for (const ScenarioAgent& a : sc.agents) {
    out << "\nagent " << a.agent.id << " {\n";
    out << "  dim " << a.agent.space.dim << "\n";
    if (!a.agent.space.basis_labels.empty()) {
      out << "  labels";
      for (const std::string& l : a.agent.space.basis_labels) out << ' ' << l;
      out << "\n";
    }
    out << "  valuation ";
    switch (a.agent.valuation.kind) {
      case ValuationKind::WeightedSum:
        if (a.agent.valuation.weights.isOnes()) {
          out << "sum";
        } else {
          out << "weighted_sum";
          detail::serialize_vec(out, a.agent.valuation.weights);
        }
        break;
      case ValuationKind::Linear:
        out << "linear";
        detail::serialize_vec(out, a.agent.valuation.weights);
        break;
      case ValuationKind::Norm:
        out << "norm";
        break;
    }
    out << "\n";
    if (a.agent.valuation.metric.has_value()) {
      out << "  metric {\n";
      const Mat& m = *a.agent.valuation.metric;
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << "    row";
        detail::serialize_vec(out, m.row(i).transpose());
        out << "\n";
      }
      out << "  }\n";
    }
    if (a.agent.current_state.size() > 0 && !a.agent.current_state.isZero()) {
      out << "  state";
      detail::serialize_vec(out, a.agent.current_state);
      out << "\n";
    }
    if (a.agent.goal_state.size() > 0 && !a.agent.goal_state.isZero()) {
      out << "  goal";
      detail::serialize_vec(out, a.agent.goal_state);
      out << "\n";
    }
    out << "}\n";
  }
  for (const ScenarioMap& m : sc.maps) {
    out << "\nmap " << m.id << " from " << m.map.source << " to "
        << m.map.target << " {\n";
    for (Eigen::Index i = 0; i < m.map.matrix.rows(); ++i) {
      out << "  row";
      detail::serialize_vec(out, m.map.matrix.row(i).transpose());
      out << "\n";
    }
    out << "}\n";
  }
  for (const ScenarioBeing& b : sc.beings) {
    out << "\nbeing " << b.being.id << " {\n";
    for (const auto& [host, v] : b.being.representations) {
      out << "  at " << host;
      detail::serialize_vec(out, v);
      out << "\n";
    }
    out << "}\n";
  }
  if (sc.has_graph) {
    out << "\ngraph {\n";
    for (const ScenarioEdge& e : sc.edges) {
      out << "  edge " << e.from << " -> " << e.to << " p "
          << detail::format_number(e.probability) << " map " << e.map_id
          << "\n";
    }
    out << "}\n";
  }
  if (sc.simulation.has_value()) {
    const ScenarioSimulation& sim = *sc.simulation;
    out << "\nsimulation {\n";
    out << "  seed " << sim.config.seed << "\n";
    out << "  max_steps " << sim.config.max_steps << "\n";
    out << "  replicates " << sim.config.replicates << "\n";
    out << "  adoption_threshold "
        << detail::format_number(sim.config.adoption_threshold) << "\n";
    out << "  record_events " << (sim.config.record_events ? "true" : "false")
        << "\n";
    if (!sim.origin.empty()) out << "  origin " << sim.origin << "\n";
    if (!sim.being_id.empty()) out << "  being " << sim.being_id << "\n";
    out << "}\n";
  }
  for (const AnalysisSpec& a : sc.analyses) {
    out << "\n";
    std::ostringstream block;
    detail::serialize_node(block, a.node, 0);
    out << block.str();
  }
  return out.str();
}

namespace detail {

inline bool vec_equal(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return false;
  }
  return true;
}

inline bool mat_equal(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

inline bool node_equal(const ScenarioNode& a, const ScenarioNode& b) {
  if (a.tokens != b.tokens || a.has_block != b.has_block ||
      a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!node_equal(a.children[i], b.children[i])) return false;
  }
  return true;
}

}  // namespace detail

// Structural equality: identical content, ignoring formatting and line
// numbers.
inline bool structurally_equal(const Scenario& a, const Scenario& b) {
  if (a.version != b.version || a.agents.size() != b.agents.size() ||
      a.maps.size() != b.maps.size() || a.beings.size() != b.beings.size() ||
      a.edges.size() != b.edges.size() || a.has_graph != b.has_graph ||
      a.simulation.has_value() != b.simulation.has_value() ||
      a.analyses.size() != b.analyses.size())
    return false;
  for (std::size_t i = 0; i < a.agents.size(); ++i) {
    const Agent& x = a.agents[i].agent;
    const Agent& y = b.agents[i].agent;
    if (x.id != y.id || x.space.dim != y.space.dim ||
        x.space.basis_labels != y.space.basis_labels ||
        x.valuation.kind != y.valuation.kind ||
        !detail::vec_equal(x.valuation.weights, y.valuation.weights) ||
        x.valuation.metric.has_value() != y.valuation.metric.has_value() ||
        (x.valuation.metric.has_value() &&
         !detail::mat_equal(*x.valuation.metric, *y.valuation.metric)) ||
        !detail::vec_equal(x.current_state, y.current_state) ||
        !detail::vec_equal(x.goal_state, y.goal_state))
      return false;
  }
  for (std::size_t i = 0; i < a.maps.size(); ++i) {
    if (a.maps[i].id != b.maps[i].id ||
        a.maps[i].map.source != b.maps[i].map.source ||
        a.maps[i].map.target != b.maps[i].map.target ||
        !detail::mat_equal(a.maps[i].map.matrix, b.maps[i].map.matrix))
      return false;
  }
  for (std::size_t i = 0; i < a.beings.size(); ++i) {
    const AbstractBeing& x = a.beings[i].being;
    const AbstractBeing& y = b.beings[i].being;
    if (x.id != y.id || x.representations.size() != y.representations.size())
      return false;
    for (const auto& [host, v] : x.representations) {
      const auto it = y.representations.find(host);
      if (it == y.representations.end() || !detail::vec_equal(v, it->second))
        return false;
    }
  }
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    if (a.edges[i].from != b.edges[i].from || a.edges[i].to != b.edges[i].to ||
        a.edges[i].probability != b.edges[i].probability ||
        a.edges[i].map_id != b.edges[i].map_id)
      return false;
  }
  if (a.simulation.has_value()) {
    const ScenarioSimulation& x = *a.simulation;
    const ScenarioSimulation& y = *b.simulation;
    if (x.config.seed != y.config.seed ||
        x.config.max_steps != y.config.max_steps ||
        x.config.replicates != y.config.replicates ||
        x.config.adoption_threshold != y.config.adoption_threshold ||
        x.config.record_events != y.config.record_events ||
        x.origin != y.origin || x.being_id != y.being_id)
      return false;
  }
  for (std::size_t i = 0; i < a.analyses.size(); ++i) {
    if (a.analyses[i].kind != b.analyses[i].kind ||
        a.analyses[i].name != b.analyses[i].name ||
        !detail::node_equal(a.analyses[i].node, b.analyses[i].node))
      return false;
  }
  return true;
}

// Content hash over the raw scenario bytes (FNV-1a, 64-bit), embedded in run
// reports so mutated inputs are detectable.
inline std::uint64_t scenario_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string scenario_hash_hex(const std::string& text) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(scenario_hash(text)));
  return buf;
}

// Materializes the influence graph (nodes = declared agents, edges with their
// resolved maps) from a validated scenario.
inline InfluenceGraph build_influence_graph(const Scenario& sc) {
  InfluenceGraph g;
  for (const ScenarioAgent& a : sc.agents) g.nodes.push_back(a.agent.id);
  for (const ScenarioEdge& e : sc.edges) {
    const ScenarioMap* m = sc.find_map(e.map_id);
    if (m == nullptr) {
      throw MissingMap("build_influence_graph: unknown map '" + e.map_id +
                       "'");
    }
    g.edges.push_back({e.from, e.to, e.probability, m->map});
  }
  return g;
}

}  // namespace vsdyn
