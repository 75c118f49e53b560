// vsdyn: command-line front end for the belief-dynamics engine.
//
// Subcommands:
//   validate <scenario>                       check a scenario file
//   simulate <scenario> [--seed N] [--replicates N] [--out DIR]
//   leadership <scenario> --leader ID --being ID
//   coherence <scenario> --pair A,B --eps E [--k K]
//   counterfactual <scenario> --agents I,J
//   report <scenario> [--analysis NAME] [--out DIR]
//
// Exit codes: 0 success, 1 scenario validation failure, 2 runtime error.
// Outputs land under --out (default ./out; environment variable VSDYN_OUT
// overrides the default). Every successful run writes a manifest there.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "vsdyn/analyses.hpp"
#include "vsdyn/scenario.hpp"
#include "vsdyn/trace_io.hpp"

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
  const char* env = std::getenv("VSDYN_OUT");
  return env != nullptr && *env != '\0' ? env : "./out";
}

// Splits "A,B" into two non-empty parts.
bool split_pair(const std::string& s, std::string& first,
                std::string& second) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return false;
  first = s.substr(0, comma);
  second = s.substr(comma + 1);
  return !first.empty() && !second.empty() &&
         second.find(',') == std::string::npos;
}

std::uint64_t scenario_seed(const vsdyn::Scenario& sc) {
  return sc.simulation.has_value() ? sc.simulation->config.seed : 0;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const vsdyn::LoadedScenario& ls, std::uint64_t seed,
                    int replicates) {
  vsdyn::write_text_file(out_dir / "manifest.json",
                         vsdyn::make_manifest(command, ls, seed, replicates));
}

// Loads and fully validates a scenario (structure, references, analyses).
vsdyn::LoadedScenario load_checked(const std::string& path) {
  vsdyn::LoadedScenario ls = vsdyn::load_scenario(path);
  const auto issues =
      vsdyn::check_analyses(ls.scenario, fs::path(path).filename().string());
  if (!issues.empty()) {
    throw vsdyn::ValidationError(issues);
  }
  return ls;
}

int cmd_validate(const std::string& path, const std::string& out_dir) {
  const vsdyn::LoadedScenario ls = load_checked(path);
  write_manifest(out_dir, "validate", ls, scenario_seed(ls.scenario),
                 ls.scenario.simulation.has_value()
                     ? ls.scenario.simulation->config.replicates
                     : 0);
  std::cout << "OK " << path << ": " << ls.scenario.agents.size()
            << " agent(s), " << ls.scenario.maps.size() << " map(s), "
            << ls.scenario.beings.size() << " being(s), "
            << ls.scenario.edges.size() << " edge(s), "
            << ls.scenario.analyses.size() << " analysis request(s)\n";
  return 0;
}

int cmd_simulate(const std::string& path, const std::string& out_dir,
                 std::int64_t seed_flag, int replicates_flag) {
  const vsdyn::LoadedScenario ls = load_checked(path);
  const vsdyn::Scenario& sc = ls.scenario;
  std::vector<std::string> issues;
  if (!sc.has_graph) {
    issues.push_back(path + ": simulate needs a graph block");
  }
  if (!sc.simulation.has_value() || sc.simulation->origin.empty() ||
      sc.simulation->being_id.empty()) {
    issues.push_back(path +
                     ": simulate needs a simulation block naming an origin "
                     "agent and a being");
  }
  if (!issues.empty()) throw vsdyn::ValidationError(issues);

  vsdyn::SimulationConfig cfg = sc.simulation->config;
  if (seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(seed_flag);
  if (replicates_flag > 0) cfg.replicates = replicates_flag;

  const vsdyn::InfluenceGraph graph = vsdyn::build_influence_graph(sc);
  const vsdyn::AbstractBeing& being =
      sc.find_being(sc.simulation->being_id)->being;
  const auto traces = vsdyn::run_influence_process(
      graph, being, sc.simulation->origin, cfg);

  const fs::path dir(out_dir);
  vsdyn::write_text_file(dir / "trace.csv", vsdyn::traces_to_csv(traces));
  vsdyn::write_text_file(dir / "trace.json", vsdyn::traces_to_json(traces));
  write_manifest(dir, "simulate", ls, cfg.seed, cfg.replicates);

  std::size_t events = 0;
  for (const auto& t : traces) events += t.events.size();
  std::cout << "simulated " << cfg.replicates << " replicate(s), "
            << cfg.max_steps << " step(s) max, " << events
            << " event(s) recorded\n"
            << "outputs: " << (dir / "trace.csv").string() << ", "
            << (dir / "trace.json").string() << ", "
            << (dir / "manifest.json").string() << "\n";
  return 0;
}

int cmd_leadership(const std::string& path, const std::string& out_dir,
                   const std::string& leader, const std::string& being_id) {
  const vsdyn::LoadedScenario ls = load_checked(path);
  const vsdyn::Scenario& sc = ls.scenario;
  std::vector<std::string> issues;
  if (!sc.has_graph) {
    issues.push_back(path + ": leadership needs a graph block");
  }
  if (sc.find_agent(leader) == nullptr) {
    issues.push_back(path + ": unknown leader '" + leader + "'");
  }
  const vsdyn::ScenarioBeing* being = sc.find_being(being_id);
  if (being == nullptr) {
    issues.push_back(path + ": unknown being '" + being_id + "'");
  } else if (!being->being.representations.count(leader)) {
    issues.push_back(path + ": being '" + being_id +
                     "' holds no representation at '" + leader + "'");
  }
  if (!issues.empty()) throw vsdyn::ValidationError(issues);

  const vsdyn::InfluenceGraph graph = vsdyn::build_influence_graph(sc);
  const auto detail = vsdyn::leadership_component_detail(
      graph, leader, being->being.representations.at(leader));

  vsdyn::AnalysisJson out;
  out["leader"] = leader;
  out["being"] = being_id;
  out["members"] = vsdyn::AnalysisJson::array();
  for (const std::string& id : detail.members) out["members"].push_back(id);
  vsdyn::AnalysisJson dims;
  for (const auto& [id, d] : detail.subspace_dim) dims[id] = d;
  out["subspace_dim"] = dims;
  const fs::path dir(out_dir);
  vsdyn::write_text_file(dir / "leadership.json", out.dump(2) + "\n");
  write_manifest(dir, "leadership", ls, scenario_seed(sc), 0);

  for (const std::string& node : graph.nodes) {
    std::cout << node << ": "
              << (detail.members.count(node) ? "in component"
                                             : "not in component")
              << "\n";
  }
  return 0;
}

int cmd_coherence(const std::string& path, const std::string& out_dir,
                  const std::string& pair, double eps, int k) {
  const vsdyn::LoadedScenario ls = load_checked(path);
  const vsdyn::Scenario& sc = ls.scenario;
  std::string a, b;
  std::vector<std::string> issues;
  if (!split_pair(pair, a, b)) {
    issues.push_back("--pair expects 'A,B'");
  } else {
    if (sc.find_agent(a) == nullptr) {
      issues.push_back(path + ": unknown agent '" + a + "'");
    }
    if (sc.find_agent(b) == nullptr) {
      issues.push_back(path + ": unknown agent '" + b + "'");
    }
  }
  const vsdyn::ScenarioMap* forward = nullptr;
  const vsdyn::ScenarioMap* backward = nullptr;
  if (issues.empty()) {
    for (const vsdyn::ScenarioMap& m : sc.maps) {
      if (m.map.source == a && m.map.target == b && forward == nullptr) {
        forward = &m;
      }
      if (m.map.source == b && m.map.target == a && backward == nullptr) {
        backward = &m;
      }
    }
    if (forward == nullptr) {
      issues.push_back(path + ": no map from '" + a + "' to '" + b + "'");
    }
    if (backward == nullptr) {
      issues.push_back(path + ": no map from '" + b + "' to '" + a + "'");
    }
  }
  if (!issues.empty()) throw vsdyn::ValidationError(issues);

  const vsdyn::Vec& x = sc.find_agent(a)->agent.current_state;
  const vsdyn::RoundTripReport rep =
      vsdyn::round_trip_bound(forward->map, backward->map, x, eps, k);

  vsdyn::AnalysisJson out;
  out["pair"] = pair;
  out["eps"] = rep.eps;
  out["k"] = rep.k;
  out["applicable"] = rep.applicable;
  if (rep.applicable) {
    out["observed"] = rep.observed;
    out["one_step_bound"] = rep.one_step_bound;
    out["k_step_bound"] = rep.k_step_bound;
    out["holds"] = rep.holds;
  }
  const fs::path dir(out_dir);
  vsdyn::write_text_file(dir / "coherence.json", out.dump(2) + "\n");
  write_manifest(dir, "coherence", ls, scenario_seed(sc), 0);

  if (!rep.applicable) {
    std::cout << "NOT_APPLICABLE: an iterate violated the eps-consistency "
                 "premises; no bound asserted\n";
  } else {
    std::cout << "observed deviation " << rep.observed << " after " << rep.k
              << " round trip(s); bound " << rep.k_step_bound << " -> "
              << (rep.holds ? "holds" : "VIOLATED") << "\n";
  }
  return 0;
}

int cmd_counterfactual(const std::string& path, const std::string& out_dir,
                       const std::string& agents) {
  const vsdyn::LoadedScenario ls = load_checked(path);
  const vsdyn::Scenario& sc = ls.scenario;
  std::string i, j;
  std::vector<std::string> issues;
  if (!split_pair(agents, i, j)) {
    issues.push_back("--agents expects 'I,J'");
  } else {
    if (sc.find_agent(i) == nullptr) {
      issues.push_back(path + ": unknown agent '" + i + "'");
    }
    if (sc.find_agent(j) == nullptr) {
      issues.push_back(path + ": unknown agent '" + j + "'");
    }
  }
  const vsdyn::ScenarioMap* map_ij = nullptr;
  if (issues.empty()) {
    for (const vsdyn::ScenarioMap& m : sc.maps) {
      if (m.map.source == i && m.map.target == j) {
        map_ij = &m;
        break;
      }
    }
    if (map_ij == nullptr) {
      issues.push_back(path + ": no map from '" + i + "' to '" + j + "'");
    }
  }
  if (!issues.empty()) throw vsdyn::ValidationError(issues);

  // Agent I's goal plays the hypothetical state; the displacement is read
  // both in I's own coordinates and through the map into J's.
  const vsdyn::Agent& actor = sc.find_agent(i)->agent;
  const vsdyn::Vec delta =
      vsdyn::displacement(actor.current_state, actor.goal_state);
  const vsdyn::Vec transformed = vsdyn::perspective_displacement(
      map_ij->map, actor.current_state, actor.goal_state);
  const vsdyn::Mat identity =
      vsdyn::Mat::Identity(delta.size(), delta.size());
  const double cost = vsdyn::counterfactual_cost(delta, identity);

  vsdyn::AnalysisJson out;
  out["agents"] = agents;
  out["actual"] = vsdyn::detail::json_vec(actor.current_state);
  out["hypothetical"] = vsdyn::detail::json_vec(actor.goal_state);
  out["displacement"] = vsdyn::detail::json_vec(delta);
  out["cost"] = cost;
  out["map"] = map_ij->id;
  out["transformed"] = vsdyn::detail::json_vec(transformed);
  const fs::path dir(out_dir);
  vsdyn::write_text_file(dir / "counterfactual.json", out.dump(2) + "\n");
  write_manifest(dir, "counterfactual", ls, scenario_seed(sc), 0);

  std::cout << "displacement:";
  for (Eigen::Index n = 0; n < delta.size(); ++n) std::cout << ' ' << delta(n);
  std::cout << "\ntransformed (" << i << " -> " << j << "):";
  for (Eigen::Index n = 0; n < transformed.size(); ++n) {
    std::cout << ' ' << transformed(n);
  }
  std::cout << "\ncost (identity metric): " << cost << "\n";
  return 0;
}

int cmd_report(const std::string& path, const std::string& out_dir,
               const std::string& analysis) {
  const vsdyn::LoadedScenario ls = load_checked(path);
  const std::string only =
      analysis == "all" ? std::string() : analysis;
  const vsdyn::AnalysisJson report = vsdyn::run_report(ls, only);
  const std::string text = report.dump(2) + "\n";
  const fs::path dir(out_dir);
  vsdyn::write_text_file(dir / "report.json", text);
  write_manifest(dir, "report", ls, scenario_seed(ls.scenario), 0);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vsdyn: deterministic multi-agent belief-dynamics engine"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = default_out_dir();
  std::int64_t seed_flag = -1;
  int replicates_flag = 0;
  std::string leader, being_id, pair, agents, analysis = "all";
  double eps = 0.0;
  int k = 1;

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  validate->add_option("--out", out_dir, "Output directory");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run the influence process");
  simulate->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  simulate->add_option("--seed", seed_flag, "Override the scenario seed");
  simulate->add_option("--replicates", replicates_flag,
                       "Override the replicate count");
  simulate->add_option("--out", out_dir, "Output directory");

  CLI::App* leadership =
      app.add_subcommand("leadership", "Leadership component of a being");
  leadership->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  leadership->add_option("--leader", leader, "Leader agent id")->required();
  leadership->add_option("--being", being_id, "Being id")->required();
  leadership->add_option("--out", out_dir, "Output directory");

  CLI::App* coherence =
      app.add_subcommand("coherence", "Round-trip deviation bound");
  coherence->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  coherence->add_option("--pair", pair, "Agent pair 'A,B'")->required();
  coherence->add_option("--eps", eps, "Consistency epsilon")->required();
  coherence->add_option("--k", k, "Round trips");
  coherence->add_option("--out", out_dir, "Output directory");

  CLI::App* counterfactual = app.add_subcommand(
      "counterfactual", "Displacement between an agent's actual and "
                        "hypothetical states, seen from another agent");
  counterfactual->add_option("scenario", scenario_path, "Scenario file")
      ->required();
  counterfactual->add_option("--agents", agents, "Agent pair 'I,J'")
      ->required();
  counterfactual->add_option("--out", out_dir, "Output directory");

  CLI::App* report =
      app.add_subcommand("report", "Run the scenario's analysis requests");
  report->add_option("scenario", scenario_path, "Scenario file")->required();
  report->add_option("--analysis", analysis,
                     "Analysis name (default: all of them)");
  report->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(scenario_path, out_dir);
    if (simulate->parsed()) {
      return cmd_simulate(scenario_path, out_dir, seed_flag, replicates_flag);
    }
    if (leadership->parsed()) {
      return cmd_leadership(scenario_path, out_dir, leader, being_id);
    }
    if (coherence->parsed()) {
      return cmd_coherence(scenario_path, out_dir, pair, eps, k);
    }
    if (counterfactual->parsed()) {
      return cmd_counterfactual(scenario_path, out_dir, agents);
    }
    if (report->parsed()) return cmd_report(scenario_path, out_dir, analysis);
  } catch (const vsdyn::ParseError& e) {
    std::cerr << "scenario error:\n" << e.what() << "\n";
    return 1;
  } catch (const vsdyn::ValidationError& e) {
    std::cerr << "scenario error:\n" << e.what() << "\n";
    return 1;
  } catch (const vsdyn::IoFailure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const vsdyn::Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
