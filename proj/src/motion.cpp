#include "pkmc/motion.hpp"

#include <algorithm>
#include <cmath>

namespace pkmc {

std::vector<Pose> motion_samples(const MotionState& from, const MotionState& to,
                                 const VehicleParams& params, double max_step) {
  const Point2 p0 = from.pose.position;
  const double phi0 = from.pose.heading;
  // The Euler step moves exactly |d| along the initial heading.
  const double magnitude = distance(p0, to.pose.position);
  const double d = to.gear == Gear::reverse ? -magnitude : magnitude;
  const double curvature = std::tan(to.steer) / params.wheelbase;

  auto arc = [&](double u) {
    if (std::fabs(curvature) < 1e-12) {
      return Pose{{p0.x + u * std::cos(phi0), p0.y + u * std::sin(phi0)}, phi0};
    }
    const double phi = phi0 + curvature * u;
    return Pose{{p0.x + (std::sin(phi) - std::sin(phi0)) / curvature,
                 p0.y + (std::cos(phi0) - std::cos(phi)) / curvature},
                normalize_angle(phi)};
  };

  const Pose arc_end = arc(d);
  const Point2 correction = to.pose.position - arc_end.position;
  const int pieces = std::max(1, static_cast<int>(std::ceil(magnitude / max_step - 1e-9)));

  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(pieces) + 1);
  out.push_back(from.pose);
  for (int k = 1; k < pieces; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(pieces);
    Pose p = arc(f * d);
    p.position = p.position + f * correction;
    out.push_back(p);
  }
  out.push_back(to.pose);
  return out;
}

bool feasible(const MotionState& from, const MotionState& to, const VehicleParams& params,
              const CollisionChecker& checker) {
  // Endpoint first: it is the most common failure and cheapest to reject.
  if (!checker.pose_free(to.pose)) {
    return false;
  }
  const std::vector<Pose> poses = motion_samples(from, to, params);
  for (std::size_t i = 0; i + 1 < poses.size(); ++i) {
    if (!checker.pose_free(poses[i])) {
      return false;
    }
  }
  return true;
}

bool feasible(const MotionState& from, const MotionState& to, const Scenario& scenario) {
  return feasible(from, to, scenario.vehicle, CollisionChecker(scenario));
}

std::optional<double> dubins_connects(const Pose& from, const Pose& to, const VehicleParams& params,
                                      const CollisionChecker& checker) {
  const auto path = shortest_dubins(from, to, params.turn_radius());
  if (!path) {
    return std::nullopt;
  }
  const std::vector<DubinsSample> samples = sample_dubins(*path, to, kCollisionStep);
  // Destination first, then walk back from it: blocked paths usually fail
  // near the goal slot or near the start.
  for (std::size_t i = samples.size(); i-- > 0;) {
    if (!checker.pose_free(samples[i].pose)) {
      return std::nullopt;
    }
  }
  return path->length();
}

std::optional<double> dubins_connects(const Pose& from, const Pose& to, const VehicleParams& params,
                                      const Scenario& scenario) {
  return dubins_connects(from, to, params, CollisionChecker(scenario));
}

std::vector<MotionState> closing_segment(const Pose& from, const Pose& to, const VehicleParams& params) {
  std::vector<MotionState> out;
  const auto path = shortest_dubins(from, to, params.turn_radius());
  if (!path) {
    return out;
  }
  const std::vector<DubinsSample> samples = sample_dubins(*path, to, kCollisionStep);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    out.push_back(MotionState{samples[i].pose, Gear::forward,
                              static_cast<double>(samples[i].turn) * params.max_steer});
  }
  return out;
}

}  // namespace pkmc
