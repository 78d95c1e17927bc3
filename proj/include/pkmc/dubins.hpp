#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pkmc/geometry.hpp"

namespace pkmc {

enum class DubinsWord { LSL, RSR, LSR, RSL, RLR, LRL };

const char* to_string(DubinsWord word);

/// Forward-only path of three constant-curvature segments at a fixed turn
/// radius. Segment lengths are in meters.
struct DubinsPath {
  Pose start;
  double radius = 1.0;
  DubinsWord word = DubinsWord::LSL;
  std::array<double, 3> lengths{};

  double length() const { return lengths[0] + lengths[1] + lengths[2]; }

  /// +1 left, 0 straight, -1 right for each segment.
  std::array<int, 3> turns() const;

  /// Pose after travelling `s` meters along the path, s in [0, length()].
  Pose sample(double s) const;
};

/// Shortest of the six candidate words, or nullopt if radius <= 0.
std::optional<DubinsPath> shortest_dubins(const Pose& from, const Pose& to, double radius);

/// All feasible candidate words (for tests and diagnostics).
std::vector<DubinsPath> all_dubins(const Pose& from, const Pose& to, double radius);

struct DubinsSample {
  Pose pose;
  int turn = 0;  // turn direction of the segment that ends at this sample
};

/// Poses along the path with spacing <= max_step. Segment junctions are
/// always sampled, so no interval straddles two segments. The first sample
/// is the start pose (turn 0), the last one is exactly `end`.
std::vector<DubinsSample> sample_dubins(const DubinsPath& path, const Pose& end, double max_step);

}  // namespace pkmc
