#include "pkmc/vehicle.hpp"

#include <stdexcept>
#include <string>

namespace pkmc {

const char* to_string(Gear gear) { return gear == Gear::forward ? "forward" : "reverse"; }

Gear gear_from_string(const std::string& name) {
  if (name == "forward") return Gear::forward;
  if (name == "reverse") return Gear::reverse;
  throw std::invalid_argument("unknown gear '" + name + "'");
}

ActionSet make_action_set(const VehicleParams& params, int steer_count, double step) {
  if (steer_count < 3 || steer_count % 2 == 0) {
    throw std::invalid_argument("make_action_set: steer_count must be odd and >= 3, got " +
                                std::to_string(steer_count));
  }
  if (!(step > 0.0)) {
    throw std::invalid_argument("make_action_set: step must be positive");
  }
  ActionSet set;
  set.steer_count_ = steer_count;
  set.step_ = step;
  set.max_steer_ = params.max_steer;
  const int half = steer_count / 2;
  for (double sign : {1.0, -1.0}) {
    for (int i = 0; i < steer_count; ++i) {
      // Symmetric levels; the middle one is exactly zero.
      const double steer = params.max_steer * static_cast<double>(i - half) / static_cast<double>(half);
      set.actions_.push_back({sign * step, steer});
    }
  }
  return set;
}

MotionState transition(const MotionState& state, const Action& action, const VehicleParams& params) {
  const double heading = state.pose.heading;
  MotionState next;
  next.pose.position.x = state.pose.position.x + action.distance * std::cos(heading);
  next.pose.position.y = state.pose.position.y + action.distance * std::sin(heading);
  next.pose.heading =
      normalize_angle(heading + action.distance * std::tan(action.steer) / params.wheelbase);
  next.gear = action.distance < 0.0 ? Gear::reverse : Gear::forward;
  next.steer = action.steer;
  return next;
}

}  // namespace pkmc
