#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkmc/format_error.hpp"
#include "pkmc/scenario.hpp"

namespace pkmc {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool valid() const { return lo <= hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Procedural generation settings. Slot size is the free length of a
/// parallel slot, or the free width of a perpendicular or diagonal slot.
struct GenSpec {
  ScenarioKind kind = ScenarioKind::parallel;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  bool empty_lot = false;       // keep the layout's start and goal, drop every obstacle
  bool swap_direction = false;  // default plans from the slot out to free space; swapped plans in, headings reversed
  WorldBounds bounds;
  VehicleParams vehicle;
  Range slot_size{4.6, 5.4};
  Range pillar_count{0.0, 3.0};  // clutter: free-standing pillars in the aisle
  Range goal_distance{4.0, 8.0}; // along-aisle offset of the free-space pose
  double position_jitter = 0.2;  // meters, start and goal
  double heading_jitter = 0.1;   // radians, start and goal

  /// Kind-specific default slot size for `vehicle`.
  static Range default_slot_size(ScenarioKind kind, const VehicleParams& vehicle);
  /// Defaults for `kind` including its slot size.
  static GenSpec defaults(ScenarioKind kind);
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seed-deterministic generation. Each scenario is rejection-sampled up to
/// 100 times; a spec whose ranges cannot produce a valid scenario throws.
std::vector<Scenario> generate(const GenSpec& spec);

/// Stable scenario id, e.g. "parallel-0007-000" or "empty-diagonal-0003-012".
std::string scenario_id(const GenSpec& spec, std::size_t index);

/// Names of violated invariants; empty when the scenario is well formed.
std::vector<std::string> validate(const Scenario& scenario);

std::string scenario_to_text(const Scenario& scenario);
Scenario scenario_from_text(const std::string& text, const std::string& source = "<scenario>");
void write_scenario(const Scenario& scenario, const std::filesystem::path& path);
Scenario read_scenario(const std::filesystem::path& path);

/// Every *.scn file below `dir`, sorted by path.
std::vector<std::filesystem::path> list_scenario_files(const std::filesystem::path& dir);

}  // namespace pkmc
