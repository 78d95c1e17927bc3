#include "pkmc/dubins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pkmc {
namespace {

double mod2pi(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) {
    r += kTwoPi;
  }
  return r;
}

constexpr std::array<std::array<int, 3>, 6> kWordTurns = {{
    {1, 0, 1},    // LSL
    {-1, 0, -1},  // RSR
    {1, 0, -1},   // LSR
    {-1, 0, 1},   // RSL
    {-1, 1, -1},  // RLR
    {1, -1, 1},   // LRL
}};

// Advances `pose` along a constant-curvature segment (turn in {-1, 0, 1}).
Pose advance(const Pose& pose, int turn, double s, double radius) {
  const double phi = pose.heading;
  if (turn == 0) {
    return Pose{{pose.position.x + s * std::cos(phi), pose.position.y + s * std::sin(phi)}, phi};
  }
  const double k = static_cast<double>(turn) / radius;
  const double phi1 = phi + k * s;
  return Pose{{pose.position.x + (std::sin(phi1) - std::sin(phi)) / k,
               pose.position.y + (std::cos(phi) - std::cos(phi1)) / k},
              normalize_angle(phi1)};
}

// Normalized segment parameters (t, p, q) in units of the radius for one
// word; nullopt when the word does not exist for this geometry.
std::optional<std::array<double, 3>> solve_word(DubinsWord word, double alpha, double beta, double d) {
  const double sa = std::sin(alpha);
  const double sb = std::sin(beta);
  const double ca = std::cos(alpha);
  const double cb = std::cos(beta);
  const double c_ab = std::cos(alpha - beta);
  switch (word) {
    case DubinsWord::LSL: {
      const double p2 = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
      if (p2 < 0.0) return std::nullopt;
      const double tmp = std::atan2(cb - ca, d + sa - sb);
      return std::array<double, 3>{mod2pi(-alpha + tmp), std::sqrt(p2), mod2pi(beta - tmp)};
    }
    case DubinsWord::RSR: {
      const double p2 = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
      if (p2 < 0.0) return std::nullopt;
      const double tmp = std::atan2(ca - cb, d - sa + sb);
      return std::array<double, 3>{mod2pi(alpha - tmp), std::sqrt(p2), mod2pi(-beta + tmp)};
    }
    case DubinsWord::LSR: {
      const double p2 = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
      if (p2 < 0.0) return std::nullopt;
      const double p = std::sqrt(p2);
      const double tmp = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
      return std::array<double, 3>{mod2pi(-alpha + tmp), p, mod2pi(-mod2pi(beta) + tmp)};
    }
    case DubinsWord::RSL: {
      const double p2 = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb);
      if (p2 < 0.0) return std::nullopt;
      const double p = std::sqrt(p2);
      const double tmp = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
      return std::array<double, 3>{mod2pi(alpha - tmp), p, mod2pi(beta - tmp)};
    }
    case DubinsWord::RLR: {
      const double tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
      if (std::fabs(tmp) > 1.0) return std::nullopt;
      const double p = mod2pi(kTwoPi - std::acos(tmp));
      const double t = mod2pi(alpha - std::atan2(ca - cb, d - sa + sb) + p / 2.0);
      return std::array<double, 3>{t, p, mod2pi(alpha - beta - t + p)};
    }
    case DubinsWord::LRL: {
      const double tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
      if (std::fabs(tmp) > 1.0) return std::nullopt;
      const double p = mod2pi(kTwoPi - std::acos(tmp));
      const double t = mod2pi(-alpha - std::atan2(ca - cb, d + sa - sb) + p / 2.0);
      return std::array<double, 3>{t, p, mod2pi(mod2pi(beta) - alpha - t + p)};
    }
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(DubinsWord word) {
  switch (word) {
    case DubinsWord::LSL: return "LSL";
    case DubinsWord::RSR: return "RSR";
    case DubinsWord::LSR: return "LSR";
    case DubinsWord::RSL: return "RSL";
    case DubinsWord::RLR: return "RLR";
    case DubinsWord::LRL: return "LRL";
  }
  return "?";
}

std::array<int, 3> DubinsPath::turns() const { return kWordTurns[static_cast<std::size_t>(word)]; }

Pose DubinsPath::sample(double s) const {
  const auto t = turns();
  Pose pose = start;
  double remaining = std::clamp(s, 0.0, length());
  for (std::size_t i = 0; i < 3; ++i) {
    const double seg = std::min(remaining, lengths[i]);
    pose = advance(pose, t[i], seg, radius);
    remaining -= seg;
    if (remaining <= 0.0) {
      break;
    }
  }
  return pose;
}

std::vector<DubinsPath> all_dubins(const Pose& from, const Pose& to, double radius) {
  std::vector<DubinsPath> out;
  if (!(radius > 0.0)) {
    return out;
  }
  const double dx = to.position.x - from.position.x;
  const double dy = to.position.y - from.position.y;
  const double d = std::hypot(dx, dy) / radius;
  const double theta = d > 0.0 ? mod2pi(std::atan2(dy, dx)) : 0.0;
  const double alpha = mod2pi(from.heading - theta);
  const double beta = mod2pi(to.heading - theta);
  for (int w = 0; w < 6; ++w) {
    const auto word = static_cast<DubinsWord>(w);
    const auto params = solve_word(word, alpha, beta, d);
    if (!params) {
      continue;
    }
    DubinsPath path;
    path.start = from;
    path.radius = radius;
    path.word = word;
    for (std::size_t i = 0; i < 3; ++i) {
      path.lengths[i] = (*params)[i] * radius;
    }
    out.push_back(path);
  }
  return out;
}

std::optional<DubinsPath> shortest_dubins(const Pose& from, const Pose& to, double radius) {
  std::optional<DubinsPath> best;
  for (const DubinsPath& path : all_dubins(from, to, radius)) {
    // Strict comparison keeps the earliest word on ties (deterministic).
    if (!best || path.length() < best->length()) {
      best = path;
    }
  }
  return best;
}

std::vector<DubinsSample> sample_dubins(const DubinsPath& path, const Pose& end, double max_step) {
  std::vector<DubinsSample> out;
  out.push_back({path.start, 0});
  const auto t = path.turns();
  Pose segment_start = path.start;
  for (std::size_t i = 0; i < 3; ++i) {
    const double len = path.lengths[i];
    if (len <= 1e-12) {
      continue;
    }
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_step - 1e-9)));
    for (int k = 1; k <= pieces; ++k) {
      const double s = len * static_cast<double>(k) / static_cast<double>(pieces);
      out.push_back({advance(segment_start, t[i], s, path.radius), t[i]});
    }
    segment_start = out.back().pose;
  }
  out.back().pose = end;
  return out;
}

}  // namespace pkmc
