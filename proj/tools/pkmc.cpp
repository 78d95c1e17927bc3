// Command-line front end: gen | plan | train | bench.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pkmc/bench.hpp"
#include "pkmc/data_pipeline.hpp"
#include "pkmc/policy_iteration.hpp"
#include "pkmc/scenarios.hpp"

namespace fs = std::filesystem;
using namespace pkmc;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kNoPath = 3, kBadModel = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool no_wall_time = false;

  RunConfig load() const {
    RunConfig c;
    if (!config.empty()) {
      try {
        c = read_run_config(config);
      } catch (const std::exception& e) {
        throw UsageError(e.what());
      }
    }
    if (seed) c.seed = *seed;
    if (no_wall_time) c.record_wall_time = false;
    return c;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "run configuration file");
  cmd->add_option("--seed", common.seed, "global seed (overrides the config)");
  cmd->add_flag("--no-wall-time", common.no_wall_time, "write 0 for every wall-clock field");
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Scenario load_scenario(const fs::path& path) {
  try {
    Scenario s = read_scenario(path);
    const auto problems = validate(s);
    if (!problems.empty()) throw UsageError(path.string() + ": invalid scenario (" + problems.front() + ")");
    return s;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::vector<Scenario> load_scenario_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("scenario directory not found: " + dir.string());
  std::vector<Scenario> out;
  for (const fs::path& p : list_scenario_files(dir)) out.push_back(load_scenario(p));
  if (out.size() < 3) throw UsageError("need at least 3 scenarios in " + dir.string());
  for (const Scenario& s : out) {
    if (!(s.vehicle == out.front().vehicle)) throw UsageError("scenarios in " + dir.string() + " use different vehicles");
  }
  return out;
}

std::vector<Scenario> pick(const std::vector<Scenario>& all, const std::vector<std::string>& ids) {
  std::map<std::string, const Scenario*> by_id;
  for (const Scenario& s : all) by_id[s.id] = &s;
  std::vector<Scenario> out;
  for (const std::string& id : ids) out.push_back(*by_id.at(id));
  return out;
}

std::vector<std::string> ids_of(const std::vector<Scenario>& all) {
  std::vector<std::string> ids;
  for (const Scenario& s : all) ids.push_back(s.id);
  return ids;
}

NetworkParams load_model(const std::string& path, const NetworkShape& expected) {
  if (path.empty()) throw ModelError("a model file is required (--model)");
  try {
    NetworkParams p = load_checkpoint(path);
    if (p.shape.action_count != expected.action_count || p.shape.steer_count != expected.steer_count ||
        p.shape.grid != expected.grid) {
      throw ShapeError("model action set or grid does not match the configuration");
    }
    return p;
  } catch (const std::exception& e) {
    throw ModelError(e.what());
  }
}

// ---------------------------------------------------------------------------

struct GenArgs {
  Common common;
  std::string kind;
  std::size_t count = 1;
  std::string out;
  bool empty_lot = false;
  bool swap = false;
};

int cmd_gen(const GenArgs& a) {
  RunConfig cfg = a.common.load();
  GenSpec spec = cfg.gen_spec(scenario_kind_from_string(a.kind), a.count, cfg.seed);
  spec.empty_lot = spec.empty_lot || a.empty_lot;
  spec.swap_direction = spec.swap_direction || a.swap;
  std::vector<Scenario> scenarios;
  try {
    scenarios = generate(spec);
  } catch (const GenerationError& e) {
    std::cerr << "gen: " << e.what() << "\n";
    return kFailure;
  }
  fs::create_directories(a.out);
  for (const Scenario& s : scenarios) write_scenario(s, fs::path(a.out) / (s.id + ".scn"));
  std::cout << "wrote " << scenarios.size() << " scenarios to " << a.out << "\n";
  return kOk;
}

struct PlanArgs {
  Common common;
  std::string scenario;
  std::string planner = "mcts";
  std::string evaluator = "uniform";
  std::string model;
  std::string out;
  std::string svg;
};

int cmd_plan(const PlanArgs& a) {
  const RunConfig cfg = a.common.load();
  const Scenario s = load_scenario(a.scenario);
  const std::vector<MotionState>* states = nullptr;
  std::vector<MotionState> visited;
  std::size_t tree_states = 0;
  PathStats stats;
  std::optional<SearchResult> mcts;
  std::optional<AStarResult> astar;

  try {
    if (a.planner == "mcts") {
      const SearchConfig sc = cfg.search_config(s.vehicle);
      std::unique_ptr<Evaluator> evaluator;
      if (a.evaluator == "net") {
        evaluator = std::make_unique<NetworkEvaluator>(
            std::make_shared<const NetworkParams>(load_model(a.model, cfg.network_shape(s.vehicle))));
      } else {
        evaluator = uniform_evaluator(sc.actions.size());
      }
      mcts = run_search(s, *evaluator, sc);
      stats = {mcts->nodes_created, mcts->wall_ms, to_string(mcts->termination)};
      if (mcts->best_path) {
        states = &mcts->best_path->states;
        tree_states = mcts->best_path->tree_states;
      }
      for (const TreeNode& n : mcts->tree->nodes()) {
        if (n.status == NodeStatus::explored) visited.push_back(n.state);
      }
    } else {
      astar = hybrid_astar(s, cfg.astar_config(s.vehicle));
      stats = {astar->nodes_created, astar->wall_ms, to_string(astar->termination)};
      if (astar->path) {
        states = &*astar->path;
        tree_states = astar->tree_states;
      }
      visited = astar->visited;
    }
  } catch (const PlanningError& e) {
    throw UsageError(e.what());
  }
  if (!cfg.record_wall_time) stats.ms = 0.0;

  const PathFile file = make_path_file(s, a.planner, states, tree_states, cfg.weights, stats);
  write_path_file(file, a.out);
  if (!a.svg.empty()) write_file(a.svg, render_svg(s, {states, &visited}));
  if (!file.found()) {
    std::cerr << "plan: no path found (" << stats.termination << ", " << stats.nodes << " nodes)\n";
    return kNoPath;
  }
  std::cout << "path with " << file.poses.size() << " poses, cost " << file.cost.total << ", " << stats.nodes
            << " nodes\n";
  return kOk;
}

struct TrainArgs {
  Common common;
  std::string scenarios;
  std::string out;
  std::optional<std::size_t> resume;
  std::optional<std::size_t> iterations;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = a.common.load();
  if (a.iterations) cfg.train.iterations = *a.iterations;
  cfg.train.seed = cfg.seed;
  const std::vector<Scenario> all = load_scenario_dir(a.scenarios);
  const DatasetSplit split = split_dataset(ids_of(all), cfg.seed);
  const VehicleParams& vehicle = all.front().vehicle;

  fs::create_directories(a.out);
  const fs::path csv = fs::path(a.out) / "metrics.csv";
  PolicyIterationSetup setup;
  setup.train = pick(all, split.train);
  setup.validation = pick(all, split.validation);
  setup.train_config = cfg.train;
  setup.search = cfg.search_config(vehicle);
  setup.shape = cfg.network_shape(vehicle);
  setup.out_dir = a.out;
  setup.record_wall_time = cfg.record_wall_time;

  std::vector<IterationReport> kept;
  if (a.resume) {
    const std::size_t k = *a.resume;
    std::ifstream in(csv);
    if (!in) throw UsageError("cannot resume: " + csv.string() + " not found");
    for (IterationReport& r : read_metrics_csv(in)) {
      if (r.iteration <= k) kept.push_back(std::move(r));
    }
    if (kept.size() != k) throw UsageError("cannot resume: metrics.csv has fewer than " + std::to_string(k) + " rows");
    if (k > 0) {
      setup.initial = load_model((fs::path(a.out) / checkpoint_name(k)).string(), setup.shape);
      setup.first_iteration = k;
    }
    if (k >= cfg.train.iterations) {
      std::cout << "nothing to do: " << k << " of " << cfg.train.iterations << " iterations already done\n";
      return kOk;
    }
    setup.train_config.iterations = cfg.train.iterations - k;
  }

  std::ofstream out(csv, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  write_metrics_csv(kept, out);
  out.flush();
  setup.on_report = [&](const IterationReport& r) {
    out << metrics_row(r) << '\n';
    out.flush();
    std::cout << "iteration " << r.iteration << ": median nodes " << r.median_nodes_to_first_path << ", success "
              << r.success_rate << ", loss " << r.mean_loss << "\n";
  };
  run_policy_iteration(setup);
  return kOk;
}

struct BenchArgs {
  Common common;
  std::string scenarios;
  std::string model;
  std::vector<double> disc{0.1, 0.2, 0.4};
  std::string csv;
  std::string split = "validation";
};

int cmd_bench(const BenchArgs& a) {
  const RunConfig cfg = a.common.load();
  const std::vector<Scenario> all = load_scenario_dir(a.scenarios);
  const NetworkParams model = load_model(a.model, cfg.network_shape(all.front().vehicle));
  std::vector<Scenario> chosen = all;
  if (a.split != "all") {
    const DatasetSplit split = split_dataset(ids_of(all), cfg.seed);
    chosen = pick(all, a.split == "train" ? split.train : a.split == "test" ? split.test : split.validation);
  }
  const std::vector<SweepRow> rows = run_sweep(chosen, a.disc, cfg, model);
  std::ostringstream text;
  text << kSweepHeader << '\n';
  for (const SweepRow& r : rows) text << sweep_row(r) << '\n';
  write_file(a.csv, text.str());
  std::cout << text.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parking path planning with Monte Carlo tree search"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "generate parking scenarios");
  g->add_option("--kind", gen.kind, "parallel | perpendicular | diagonal")
      ->required()
      ->check(CLI::IsMember({"parallel", "perpendicular", "diagonal"}));
  g->add_option("--count", gen.count, "number of scenarios")->required()->check(CLI::PositiveNumber);
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_flag("--empty-lot", gen.empty_lot, "drop all obstacles");
  g->add_flag("--swap", gen.swap, "plan from the aisle into the slot");
  add_common(g, gen.common);

  PlanArgs plan;
  CLI::App* p = app.add_subcommand("plan", "plan one scenario");
  p->add_option("--scenario", plan.scenario, "scenario file")->required();
  p->add_option("--planner", plan.planner, "mcts | hastar")->check(CLI::IsMember({"mcts", "hastar"}));
  p->add_option("--evaluator", plan.evaluator, "uniform | net")->check(CLI::IsMember({"uniform", "net"}));
  p->add_option("--model", plan.model, "checkpoint for --evaluator net");
  p->add_option("--out", plan.out, "path file to write")->required();
  p->add_option("--svg", plan.svg, "optional SVG picture");
  add_common(p, plan.common);

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "policy iteration over a scenario directory");
  t->add_option("--scenarios", train.scenarios, "scenario directory")->required();
  t->add_option("--out", train.out, "output directory for checkpoints and metrics.csv")->required();
  t->add_option("--resume", train.resume, "continue after this many finished iterations");
  t->add_option("--iterations", train.iterations, "total iterations (overrides the config)");
  add_common(t, train.common);

  BenchArgs bench;
  CLI::App* b = app.add_subcommand("bench", "discretization sweep of both planners");
  b->add_option("--scenarios", bench.scenarios, "scenario directory")->required();
  b->add_option("--model", bench.model, "trained checkpoint");
  b->add_option("--disc", bench.disc, "position discretizations in meters")->delimiter(',');
  b->add_option("--csv", bench.csv, "sweep CSV to write")->required();
  b->add_option("--split", bench.split, "validation | test | train | all")
      ->check(CLI::IsMember({"validation", "test", "train", "all"}));
  add_common(b, bench.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (p->parsed()) {
      if (plan.evaluator == "net" && plan.model.empty()) throw ModelError("--evaluator net needs --model");
      return cmd_plan(plan);
    }
    if (t->parsed()) return cmd_train(train);
    if (b->parsed()) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kBadModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
