#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pkmc/cost_model.hpp"
#include "pkmc/evaluator.hpp"
#include "pkmc/format_error.hpp"
#include "pkmc/hybrid_astar.hpp"
#include "pkmc/mcts.hpp"
#include "pkmc/policy_iteration.hpp"
#include "pkmc/scenarios.hpp"

namespace pkmc {

// ---------------------------------------------------------------------------
// Run configuration

struct ActionConfig {
  int steer_count = 7;
  double step = 0.8;
  friend bool operator==(const ActionConfig&, const ActionConfig&) = default;
};

struct SearchLimits {
  double c_puct = 1.0;
  std::size_t node_limit = 20000;
  double time_limit_ms = 1.0e9;
  std::size_t path_target = 5;
  int max_depth = 30;
  friend bool operator==(const SearchLimits&, const SearchLimits&) = default;
};

struct AStarLimits {
  double cell = 0.1;
  double heading_bin = 0.01;
  double heuristic_weight = 1.0;
  std::size_t node_limit = 20000;
  double time_limit_ms = 1.0e9;
  friend bool operator==(const AStarLimits&, const AStarLimits&) = default;
};

struct NetworkSizes {
  int grid = kDefaultGrid;
  std::array<int, 3> conv_channels{16, 32, 32};
  int feature = 128;
  int head_hidden = 64;
  friend bool operator==(const NetworkSizes&, const NetworkSizes&) = default;
};

/// Generation ranges; the slot size falls back to the kind's default.
struct GenerationConfig {
  std::optional<Range> slot_size;
  Range pillar_count{0.0, 3.0};
  Range goal_distance{4.0, 8.0};
  double position_jitter = 0.2;
  double heading_jitter = 0.1;
  bool swap_direction = false;
  bool empty_lot = false;
  WorldBounds bounds;
  friend bool operator==(const GenerationConfig&, const GenerationConfig&) = default;
};

/// Every tunable of the tools. All keys are optional in the file; unknown
/// keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  bool record_wall_time = true;
  ActionConfig actions;
  CostWeights weights;
  SearchLimits search;
  AStarLimits hastar;
  NetworkSizes network;
  TrainConfig train;
  GenerationConfig generation;

  SearchConfig search_config(const VehicleParams& vehicle) const;
  AStarConfig astar_config(const VehicleParams& vehicle) const;
  NetworkShape network_shape(const VehicleParams& vehicle) const;
  GenSpec gen_spec(ScenarioKind kind, std::size_t count, std::uint64_t seed) const;
};

RunConfig run_config_from_text(const std::string& text, const std::string& source = "<config>");
std::string run_config_to_text(const RunConfig& config);
RunConfig read_run_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Path files

struct PathPose {
  Pose pose;
  Gear gear = Gear::forward;
  friend bool operator==(const PathPose&, const PathPose&) = default;
};

struct PathStats {
  std::size_t nodes = 0;
  double ms = 0.0;
  std::string termination;
  friend bool operator==(const PathStats&, const PathStats&) = default;
};

struct PathFile {
  std::string scenario;
  std::string planner;            // "mcts" or "hastar"
  std::vector<PathPose> poses;    // empty when no path was found
  std::vector<double> steer;      // one per segment
  std::size_t closing_from = 0;   // index of the last action-produced pose
  PathCost cost;
  PathStats stats;

  bool found() const { return !poses.empty(); }
  /// Poses with their arrival steer; the first state takes `start_steer`.
  std::vector<MotionState> states(double start_steer) const;

  friend bool operator==(const PathFile& a, const PathFile& b) {
    return a.scenario == b.scenario && a.planner == b.planner && a.poses == b.poses && a.steer == b.steer &&
           a.closing_from == b.closing_from && a.cost.safety == b.cost.safety &&
           a.cost.comfort == b.cost.comfort && a.cost.efficiency == b.cost.efficiency &&
           a.cost.total == b.cost.total && a.stats == b.stats;
  }
};

/// `tree_states` leading states came from actions; the rest close the path.
PathFile make_path_file(const Scenario& scenario, const std::string& planner,
                        const std::vector<MotionState>* states, std::size_t tree_states,
                        const CostWeights& weights, const PathStats& stats);

std::string path_file_to_text(const PathFile& path);
PathFile path_file_from_text(const std::string& text, const std::string& source = "<path>");
void write_path_file(const PathFile& path, const std::filesystem::path& file);
PathFile read_path_file(const std::filesystem::path& file);

/// Problems found when replaying `path` against `scenario`; empty when it
/// is kinematically consistent, collision-free and its stored cost matches a
/// recomputation to 1e-6.
std::vector<std::string> check_path_file(const PathFile& path, const Scenario& scenario, const ActionSet& actions,
                                         const CostWeights& weights);

// ---------------------------------------------------------------------------
// Rendering

struct SvgOverlay {
  const std::vector<MotionState>* path = nullptr;
  const std::vector<MotionState>* visited = nullptr;
};

std::string render_svg(const Scenario& scenario, const SvgOverlay& overlay);

// ---------------------------------------------------------------------------
// Discretization sweep

extern const char* const kSweepHeader;

struct SweepRow {
  double disc = 0.0;
  std::string planner;
  std::optional<double> median_ms;
  double success_rate = 0.0;
  std::optional<double> median_cost;  // unclamped path cost of solved scenarios
};

/// Both planners over `scenarios` for each position discretization. Hybrid
/// A* uses `disc` as its cell size; the MCTS step scales as
/// step * disc / 0.1.
std::vector<SweepRow> run_sweep(std::span<const Scenario> scenarios, std::span<const double> discretizations,
                                const RunConfig& config, const NetworkParams& model);

std::string sweep_row(const SweepRow& row);

}  // namespace pkmc
