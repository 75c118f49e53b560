// Scenario file tests: grammar coverage, exhaustive error collection,
// version pinning, canonical serialization round trips, content hashing,
// trace/manifest artifact schemas, and artifact byte determinism.

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "vsdyn/analyses.hpp"
#include "vsdyn/scenario.hpp"
#include "vsdyn/trace_io.hpp"

using vsdyn::AbstractBeing;
using vsdyn::build_influence_graph;
using vsdyn::check_analyses;
using vsdyn::InfluenceEdge;
using vsdyn::InfluenceGraph;
using vsdyn::InterpretationMap;
using vsdyn::load_scenario;
using vsdyn::make_manifest;
using vsdyn::Mat;
using vsdyn::parse_scenario;
using vsdyn::ParseError;
using vsdyn::run_influence_process;
using vsdyn::scenario_hash;
using vsdyn::scenario_hash_hex;
using vsdyn::Scenario;
using vsdyn::serialize_scenario;
using vsdyn::SimulationConfig;
using vsdyn::SimulationTrace;
using vsdyn::structurally_equal;
using vsdyn::TraceEvent;
using vsdyn::traces_to_csv;
using vsdyn::traces_to_json;
using vsdyn::ValidationError;
using vsdyn::Vec;

namespace fs = std::filesystem;

namespace {

const char* const kScenarioDir = VSDYN_SCENARIO_DIR;

Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

std::vector<fs::path> bundled_scenarios() {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(kScenarioDir)) {
    if (entry.path().extension() == ".scn") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  REQUIRE_FALSE(files.empty());
  return files;
}

bool any_issue_contains(const std::vector<std::string>& issues,
                        const std::string& needle) {
  for (const std::string& s : issues) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

const char* const kFullScenario = R"(# exercises every section
version 1

agent A {
  dim 2
  labels taste price
  valuation weighted_sum 1 0.5
  state 0.5 0.25
  goal 1 1
}

agent B {
  dim 2
  valuation norm
  metric {
    row 2 0
    row 0 1
  }
}

agent C {
  dim 1
  valuation linear -2
}

map T from A to B {
  row 1 0
  row 0 1
}

being x { at A 0.5 0.25 }

graph {
  edge A -> B p 0.5 map T
}

simulation {
  seed 11
  max_steps 7
  replicates 2
  adoption_threshold 1e-8
  record_events true
  origin A
  being x
}

analysis gradient pull { agent A }
analysis alignment tilt {
  belief 1 1
  agent A
}
)";

}  // namespace

TEST_CASE("parsing populates every scenario section") {
  const Scenario sc = parse_scenario(kFullScenario, "full.scn");

  REQUIRE(sc.version == 1);
  REQUIRE(sc.agents.size() == 3);
  const vsdyn::Agent& a = sc.agents[0].agent;
  CHECK(a.id == "A");
  CHECK(a.space.dim == 2);
  REQUIRE(a.space.basis_labels.size() == 2);
  CHECK(a.space.basis_labels[1] == "price");
  CHECK(a.valuation(make_vec({1.0, 1.0})) == Catch::Approx(1.5));
  CHECK(a.current_state(0) == 0.5);
  CHECK(a.goal_state(1) == 1.0);

  const vsdyn::Agent& b = sc.agents[1].agent;
  CHECK(b.valuation(make_vec({3.0, 0.0})) ==
        Catch::Approx(std::sqrt(18.0)));
  CHECK(b.current_state.isZero());  // defaults to the zero vector

  const vsdyn::Agent& c = sc.agents[2].agent;
  CHECK(c.space.dim == 1);
  CHECK(c.valuation(make_vec({2.0})) == Catch::Approx(-4.0));

  REQUIRE(sc.maps.size() == 1);
  CHECK(sc.maps[0].id == "T");
  CHECK(sc.maps[0].map.source == "A");
  CHECK(sc.maps[0].map.target == "B");
  CHECK(sc.maps[0].map.matrix.isIdentity());

  REQUIRE(sc.beings.size() == 1);
  CHECK(sc.beings[0].being.representations.at("A")(1) == 0.25);

  REQUIRE(sc.has_graph);
  REQUIRE(sc.edges.size() == 1);
  CHECK(sc.edges[0].probability == 0.5);
  CHECK(sc.edges[0].map_id == "T");

  REQUIRE(sc.simulation.has_value());
  CHECK(sc.simulation->config.seed == 11);
  CHECK(sc.simulation->config.max_steps == 7);
  CHECK(sc.simulation->config.replicates == 2);
  CHECK(sc.simulation->config.adoption_threshold == 1e-8);
  CHECK(sc.simulation->origin == "A");
  CHECK(sc.simulation->being_id == "x");

  REQUIRE(sc.analyses.size() == 2);
  CHECK(sc.analyses[0].kind == "gradient");
  CHECK(sc.analyses[0].name == "pull");
  CHECK(sc.analyses[1].name == "tilt");
  CHECK(check_analyses(sc, "full.scn").empty());

  const InfluenceGraph g = build_influence_graph(sc);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].influence_probability == 0.5);
  CHECK(g.edges[0].map.matrix.isIdentity());
}

TEST_CASE("version statement is required and pinned to 1") {
  try {
    parse_scenario("agent A { dim 1 }", "v.scn");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(any_issue_contains(e.issues, "missing 'version'"));
  }

  try {
    parse_scenario("version 2\nagent A { dim 1 }", "v.scn");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(any_issue_contains(e.issues, "unsupported scenario version 2"));
  }
}

TEST_CASE("unbalanced braces raise a parse error") {
  CHECK_THROWS_AS(parse_scenario("version 1\nagent A { dim 1\n", "b.scn"),
                  ParseError);
  CHECK_THROWS_AS(parse_scenario("version 1\n}\n", "b.scn"), ParseError);
}

TEST_CASE("an empty agent list is rejected") {
  try {
    parse_scenario("version 1\n", "empty.scn");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(any_issue_contains(e.issues, "declares no agents"));
  }
}

TEST_CASE("zero-probability edges are rejected") {
  const std::string text = R"(version 1
agent A { dim 1 }
agent B { dim 1 }
map T from A to B { row 1 }
graph { edge A -> B p 0 map T }
)";
  try {
    parse_scenario(text, "p0.scn");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(any_issue_contains(e.issues, "probability"));
  }
}

TEST_CASE("validation collects every issue in a single throw") {
  const std::string text = R"(version 1
agent A {
  dim 2
  labels only_one
}
agent A { dim 2 }
agent D {
  dim 2
  state 1 2 3
}
map T from A to Ghost {
  row 1 0
}
map Ragged from A to A {
  row 1 0
  row 1
}
being x { at Ghost 1 }
graph {
  edge A -> Ghost p 0.5 map T
  edge A -> A p 1.5 map Ragged
}
simulation {
  max_steps 0
  origin Ghost
  being y
}
analysis gradient g1 { agent A }
analysis gradient g1 { agent A }
)";
  try {
    parse_scenario(text, "bad.scn");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    // Every defect surfaces at once, each tagged file:line.
    CHECK(e.issues.size() >= 10);
    for (const std::string& issue : e.issues) {
      INFO(issue);
      CHECK(issue.rfind("bad.scn:", 0) == 0);
    }
    CHECK(any_issue_contains(e.issues, "labels"));
    CHECK(any_issue_contains(e.issues, "state does not match dim"));
    CHECK(any_issue_contains(e.issues, "declared twice"));
    CHECK(any_issue_contains(e.issues, "Ghost"));
    CHECK(any_issue_contains(e.issues, "ragged"));
    CHECK(any_issue_contains(e.issues, "probability"));
    CHECK(any_issue_contains(e.issues, "max_steps"));
    CHECK(any_issue_contains(e.issues, "analysis name 'g1'"));
    const std::string joined = e.what();
    CHECK(std::count(joined.begin(), joined.end(), '\n') + 1 ==
          static_cast<long>(e.issues.size()));
  }
}

TEST_CASE("unknown statements, keys, and analysis kinds are reported") {
  const std::string text = R"(version 1
banana split
agent A {
  dim 1
  wobble 3
}
analysis gradient g { agent A }
)";
  // Core-section issues throw from the parser; analysis-level issues come
  // from the checker. Run both over a parseable core to see the full set.
  const std::string core_ok = R"(version 1
agent A { dim 1 }
analysis gradient g { agent A }
analysis astrology chart { sign libra }
analysis gradient g2 {
  agent Ghost
  extra 1
}
)";
  const Scenario sc = parse_scenario(core_ok, "odd.scn");
  const std::vector<std::string> aissues = check_analyses(sc, "odd.scn");
  CHECK(any_issue_contains(aissues, "unknown analysis kind 'astrology'"));
  CHECK(any_issue_contains(aissues, "unknown key 'extra'"));
  CHECK(any_issue_contains(aissues, "Ghost"));
  CHECK(aissues.size() >= 3);

  try {
    parse_scenario(text, "odd.scn");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(any_issue_contains(e.issues, "unknown top-level statement 'banana'"));
    CHECK(any_issue_contains(e.issues, "unknown key 'wobble'"));
  }

  // Scalar statements reject trailing tokens instead of discarding them, so
  // keys collapsed onto one line cannot be silently misread.
  try {
    parse_scenario("version 1\nagent C {\n  dim 1 valuation norm\n}\n",
                   "odd.scn");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(any_issue_contains(e.issues, "agent dim: expected exactly one"));
  }
}

TEST_CASE("bundled scenarios round-trip through the canonical serializer") {
  for (const fs::path& path : bundled_scenarios()) {
    DYNAMIC_SECTION("scenario " << path.filename().string()) {
      const auto ls = load_scenario(path);
      CHECK(check_analyses(ls.scenario, ls.path).empty());

      const std::string once = serialize_scenario(ls.scenario);
      const std::string twice = serialize_scenario(ls.scenario);
      CHECK(once == twice);  // serializer is deterministic

      const Scenario reparsed = parse_scenario(once, "roundtrip.scn");
      CHECK(structurally_equal(ls.scenario, reparsed));
      CHECK(serialize_scenario(reparsed) == once);

      CHECK(ls.hash_hex.size() == 16);
      CHECK(ls.hash_hex == scenario_hash_hex(ls.text));
    }
  }
}

TEST_CASE("structural equality notices any field change") {
  const Scenario base = parse_scenario(kFullScenario, "full.scn");

  Scenario tweaked = base;
  tweaked.agents[0].agent.current_state(0) += 1e-12;
  CHECK_FALSE(structurally_equal(base, tweaked));

  tweaked = base;
  tweaked.edges[0].probability = 0.25;
  CHECK_FALSE(structurally_equal(base, tweaked));

  tweaked = base;
  tweaked.analyses[1].node.children[0].tokens.back() = "2";
  CHECK_FALSE(structurally_equal(base, tweaked));

  CHECK(structurally_equal(base, base));
}

TEST_CASE("content hash changes under every single-byte mutation") {
  const auto ls = load_scenario(fs::path(kScenarioDir) / "sec_3_1_perspective.scn");
  const std::uint64_t h = scenario_hash(ls.text);
  std::size_t collisions = 0;
  for (std::size_t i = 0; i < ls.text.size(); ++i) {
    std::string mutated = ls.text;
    mutated[i] = static_cast<char>(mutated[i] ^ 0x01);
    if (scenario_hash(mutated) == h) ++collisions;
  }
  CHECK(collisions == 0);
  CHECK(scenario_hash(ls.text + " ") != h);
  CHECK(scenario_hash(std::string()) != h);
}

TEST_CASE("csv traces: header-only when empty, padded rows otherwise") {
  CHECK(traces_to_csv({}) ==
        "replicate,step,from,to,success,adopted,transmitted_norm\n");

  SimulationTrace t0;
  t0.replicate = 0;
  TraceEvent hit;
  hit.step = 1;
  hit.edge_index = 0;
  hit.from = "L";
  hit.to = "A";
  hit.success = true;
  hit.adopted = true;
  hit.transmitted = make_vec({3.0, 4.0});
  TraceEvent miss;
  miss.step = 2;
  miss.edge_index = 0;
  miss.from = "L";
  miss.to = "A";
  miss.success = false;
  miss.adopted = false;
  t0.events = {hit, miss};

  SimulationTrace t1;
  t1.replicate = 1;
  TraceEvent wide = hit;
  wide.transmitted = make_vec({1.0, 0.0, -2.5});
  t1.events = {wide};

  const std::string csv = traces_to_csv({t0, t1});
  const std::string expected =
      "replicate,step,from,to,success,adopted,transmitted_norm,c0,c1,c2\n"
      "0,1,L,A,1,1,5,3,4,\n"
      "0,2,L,A,0,0,0,,,\n"
      "1,1,L,A,1,1,2.6925824035672519,1,0,-2.5\n";
  CHECK(csv == expected);
}

TEST_CASE("json traces mirror the in-memory structure") {
  SimulationTrace t;
  t.replicate = 3;
  TraceEvent e;
  e.step = 2;
  e.edge_index = 1;
  e.from = "L";
  e.to = "A";
  e.success = true;
  e.adopted = false;
  e.transmitted = make_vec({0.5, -1.0});
  t.events = {e};
  t.final_representations["A"] = make_vec({0.5, -1.0});
  t.adoption_step["L"] = 0;

  const nlohmann::json parsed = nlohmann::json::parse(traces_to_json({t}));
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0]["replicate"] == 3);
  REQUIRE(parsed[0]["events"].size() == 1);
  CHECK(parsed[0]["events"][0]["step"] == 2);
  CHECK(parsed[0]["events"][0]["edge_index"] == 1);
  CHECK(parsed[0]["events"][0]["from"] == "L");
  CHECK(parsed[0]["events"][0]["success"] == true);
  CHECK(parsed[0]["events"][0]["adopted"] == false);
  CHECK(parsed[0]["events"][0]["transmitted"][1] == -1.0);
  CHECK(parsed[0]["final_representations"]["A"][0] == 0.5);
  CHECK(parsed[0]["adoption_step"]["L"] == 0);

  const nlohmann::json empty = nlohmann::json::parse(traces_to_json({}));
  CHECK(empty.is_array());
  CHECK(empty.empty());
}

TEST_CASE("trace artifacts are byte-deterministic per seed") {
  InfluenceGraph g;
  g.nodes = {"L", "A", "B"};
  g.edges = {
      InfluenceEdge{"L", "A", 0.5,
                    InterpretationMap{"L", "A", Mat::Identity(2, 2)}},
      InfluenceEdge{"A", "B", 0.5,
                    InterpretationMap{"A", "B", 0.5 * Mat::Identity(2, 2)}},
  };
  AbstractBeing b;
  b.id = "x";
  b.representations["L"] = make_vec({1.0, 0.25});

  SimulationConfig cfg;
  cfg.seed = 11;
  cfg.max_steps = 12;
  cfg.replicates = 4;

  const auto first = run_influence_process(g, b, "L", cfg);
  const auto second = run_influence_process(g, b, "L", cfg);
  CHECK(traces_to_csv(first) == traces_to_csv(second));
  CHECK(traces_to_json(first) == traces_to_json(second));

  SimulationConfig other = cfg;
  other.seed = 12;
  const auto shifted = run_influence_process(g, b, "L", other);
  CHECK(traces_to_csv(first) != traces_to_csv(shifted));
}

TEST_CASE("manifests carry the reproduction fields") {
  const auto ls =
      load_scenario(fs::path(kScenarioDir) / "sec_3_6_network.scn");
  const std::string text = make_manifest("simulate", ls, 99, 3);
  CHECK(text == make_manifest("simulate", ls, 99, 3));

  const nlohmann::json m = nlohmann::json::parse(text);
  CHECK(m["command"] == "simulate");
  CHECK(m["engine_version"] == vsdyn::kEngineVersion);
  CHECK(m["scenario_format_version"] == vsdyn::kScenarioFormatVersion);
  CHECK(m["scenario_path"] == ls.path);
  CHECK(m["scenario_hash"] == ls.hash_hex);
  CHECK(m["seed"] == 99);
  CHECK(m["replicates"] == 3);
}

TEST_CASE("load_scenario reads bytes, hashes them, and tags issues by name") {
  const fs::path dir =
      fs::temp_directory_path() / "vsdyn_io_test" / "nested";
  fs::create_directories(dir);
  const fs::path good = dir / "mini.scn";
  vsdyn::write_text_file(good, "version 1\nagent A {\n  dim 1\n  state 2\n}\n");
  const auto ls = load_scenario(good);
  CHECK(ls.path == good.string());
  CHECK(ls.hash_hex == scenario_hash_hex(ls.text));
  CHECK(ls.scenario.agents.size() == 1);

  const fs::path bad = dir / "broken.scn";
  vsdyn::write_text_file(bad, "version 1\n");
  try {
    load_scenario(bad);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE_FALSE(e.issues.empty());
    // Issues are tagged with the file name, not the full path.
    CHECK(e.issues.front().rfind("broken.scn:", 0) == 0);
  }

  CHECK_THROWS_AS(load_scenario(dir / "missing.scn"), vsdyn::IoFailure);
  fs::remove_all(fs::temp_directory_path() / "vsdyn_io_test");
}
