#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkmc/rng.hpp"
#include "pkmc/scenario.hpp"
#include "pkmc/vehicle.hpp"

namespace pkmc {

// ---------------------------------------------------------------------------
// Input encoding
// ---------------------------------------------------------------------------

/// Channel layout of the network input.
enum Channel : int {
  kChannelVehicle = 0,   // parked vehicles
  kChannelCurb = 1,
  kChannelPillar = 2,
  kChannelCurrent = 3,   // agent footprint, current state
  kChannelParent = 4,    // agent footprint, parent state
  kChannelGoal = 5,      // agent footprint at the destination
  kChannelGear = 6,      // constant +1 forward / -1 reverse
  kChannelSteer = 7,     // constant steer / max_steer
};
inline constexpr int kOccupancyChannels = 6;
inline constexpr int kInputChannels = 8;
inline constexpr int kDefaultGrid = 64;

/// Network input. Occupancy channels are stored one byte per cell; the two
/// numeric channels are constant planes stored as scalars.
struct StateTensor {
  int grid = kDefaultGrid;
  std::vector<std::uint8_t> occupancy;  // kOccupancyChannels x grid x grid, row-major
  double gear = 1.0;
  double steer = 0.0;

  double at(int channel, int iy, int ix) const;
  /// Dense kInputChannels x grid x grid array in channel-major order.
  void dense(std::span<double> out) const;
  std::vector<double> dense() const;

  friend bool operator==(const StateTensor&, const StateTensor&) = default;
};

/// Precomputes the scenario-constant planes (obstacles, destination) so
/// per-node encoding only rasterizes two footprints.
class ScenarioEncoder {
 public:
  ScenarioEncoder(const Scenario& scenario, int grid = kDefaultGrid);

  StateTensor encode(const MotionState& current, const MotionState& parent) const;

  int grid() const { return grid_; }
  Point2 origin() const { return origin_; }
  double resolution() const { return resolution_; }

 private:
  int grid_;
  Point2 origin_;
  double resolution_;
  double max_steer_;
  VehicleFootprint footprint_;
  std::vector<std::uint8_t> base_;  // constant occupancy channels
};

/// Convenience wrapper; the root passes its own state as `parent`.
StateTensor encode_state(const MotionState& current, const MotionState& parent, const Scenario& scenario,
                         int grid = kDefaultGrid);

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

/// Layer sizes plus the action-set descriptor the policy head is tied to.
struct NetworkShape {
  int grid = kDefaultGrid;
  std::array<int, 3> conv_channels{16, 32, 32};
  int feature = 128;
  int head_hidden = 64;
  int action_count = 14;
  int steer_count = 7;
  double step = 0.8;
  double max_steer = 0.6;

  static NetworkShape for_actions(const ActionSet& actions, int grid = kDefaultGrid);

  /// Side length of the final convolution output.
  int final_side() const { return grid / 8; }
  std::size_t parameter_count() const;
  bool valid() const;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Flat parameter block in declaration order:
/// conv{1,2,3}.{weight,gamma,beta}, fc.{weight,bias}, policy1.{weight,bias},
/// policy2.{weight,bias}, value1.{weight,bias}, value2.{weight,bias}.
/// Values are held at float32 precision so checkpoints round-trip exactly.
struct NetworkParams {
  NetworkShape shape;
  std::vector<double> values;

  static NetworkParams zeros(const NetworkShape& shape);
  static NetworkParams random(const NetworkShape& shape, Rng& rng);

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Offsets of each tensor inside NetworkParams::values.
struct ParamLayout {
  struct Block {
    std::size_t offset = 0;
    std::size_t size = 0;
    std::string name;
  };
  std::array<Block, 3> conv_weight;
  std::array<Block, 3> gamma;
  std::array<Block, 3> beta;
  Block fc_weight, fc_bias;
  Block policy1_weight, policy1_bias, policy2_weight, policy2_bias;
  Block value1_weight, value1_bias, value2_weight, value2_bias;
  std::size_t total = 0;

  explicit ParamLayout(const NetworkShape& shape);
  std::vector<Block> blocks() const;
};

struct Evaluation {
  std::vector<double> p;  // policy over the action set
  double v = 0.5;         // value in [0, 1]
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-sample forward pass.
Evaluation forward(const NetworkParams& params, const StateTensor& input);

struct TrainingSample {
  StateTensor tensor;
  std::vector<double> pi;  // policy label, sums to 1
  double r = 0.0;          // 1 good, 0 bad
};

/// Mean over the batch of -pi . log p + (v - r)^2.
double loss(const NetworkParams& params, std::span<const TrainingSample> batch);

/// On/off state of every rectifier unit over the batch, in a fixed order.
/// Two parameter vectors with equal patterns lie in the same smooth piece of
/// the loss.
std::vector<bool> rectifier_pattern(const NetworkParams& params, std::span<const TrainingSample> batch);

/// Loss and its analytic gradient with respect to every parameter.
double loss_and_gradient(const NetworkParams& params, std::span<const TrainingSample> batch,
                         std::vector<double>& gradient);

/// Momentum SGD state (velocity buffer).
struct MomentumSgd {
  double momentum = 0.9;
  std::vector<double> velocity;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One optimizer step: velocity = momentum * velocity + grad,
/// params -= lr * velocity, then params rounded to float32. Returns the
/// pre-step loss. Throws NonFiniteGradient (params untouched) on NaN/Inf.
double train_step(NetworkParams& params, MomentumSgd& optimizer, std::span<const TrainingSample> batch,
                  double learning_rate);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary layout: "PKMC1", u32 version, u32 grid, 3 x u32 conv channels,
/// u32 feature, u32 head_hidden, u32 action_count, u32 steer_count,
/// f64 step, f64 max_steer, u64 parameter count, then that many f32.
/// All little-endian.
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_checkpoint(const NetworkParams& params);

/// Throws CheckpointError on bad magic, truncation or a shape different from
/// `expected` (when given).
NetworkParams load_checkpoint(const std::filesystem::path& path, const NetworkShape* expected = nullptr);
NetworkParams deserialize_checkpoint(std::span<const std::uint8_t> bytes, const NetworkShape* expected = nullptr);

// ---------------------------------------------------------------------------
// Evaluators used by the search
// ---------------------------------------------------------------------------

/// Per-search evaluation context. Owns any scenario-derived caches, so one
/// session is used by exactly one search.
class EvaluationSession {
 public:
  virtual ~EvaluationSession() = default;
  virtual Evaluation evaluate(const MotionState& current, const MotionState& parent) = 0;
};

/// (state) -> (policy, value). Implementations are immutable and may be
/// shared by concurrent searches.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::size_t action_count() const = 0;
  virtual std::unique_ptr<EvaluationSession> open(const Scenario& scenario) const = 0;
};

/// Uniform policy and v = 0.5 for every input.
class UniformEvaluator final : public Evaluator {
 public:
  explicit UniformEvaluator(std::size_t action_count);
  std::size_t action_count() const override { return action_count_; }
  std::unique_ptr<EvaluationSession> open(const Scenario& scenario) const override;

 private:
  std::size_t action_count_;
};

std::unique_ptr<Evaluator> uniform_evaluator(std::size_t action_count);

/// Network-backed evaluator over an immutable parameter snapshot.
class NetworkEvaluator final : public Evaluator {
 public:
  explicit NetworkEvaluator(std::shared_ptr<const NetworkParams> params);
  std::size_t action_count() const override;
  std::unique_ptr<EvaluationSession> open(const Scenario& scenario) const override;
  const NetworkParams& params() const { return *params_; }

 private:
  std::shared_ptr<const NetworkParams> params_;
};

}  // namespace pkmc
