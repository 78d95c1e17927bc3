#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pkmc/evaluator.hpp"
#include "pkmc/mcts.hpp"
#include "pkmc/rng.hpp"

namespace pkmc {

struct NodeLabels {
  std::vector<NodeId> good;  // ascending id
  std::vector<NodeId> bad;   // ascending id
};

/// good: every node on a root -> destination-connected chain. bad: all other
/// EXPLORED nodes.
NodeLabels label_nodes(const SearchTree& tree);

/// Distance used by farthest point sampling: planar distance plus
/// `heading_weight` times the wrapped heading difference.
double fps_distance(const Pose& a, const Pose& b, double heading_weight = 1.0);

/// Greedy farthest point sampling over `nodes`, seeded with the lowest id.
/// Ties go to the lowest id. Returns min(k, nodes.size()) ids in selection order.
std::vector<NodeId> fps_sample(const SearchTree& tree, std::span<const NodeId> nodes, std::size_t k);

/// Same algorithm over bare poses; `ids` gives the tie-break order.
std::vector<std::size_t> fps_sample_poses(std::span<const Pose> poses, std::span<const std::size_t> ids,
                                          std::size_t k);

/// Visit-count policy N(n,a)^(1/tau), normalized. Throws
/// std::invalid_argument when every count is zero or tau <= 0.
std::vector<double> policy_label(const TreeNode& node, double tau);
std::vector<double> policy_label(std::span<const std::uint32_t> visits, double tau);

/// Balanced samples from a finished tree: k good and k bad nodes with
/// k = min(per_tree, |good|, |bad|). Nodes with fewer than `min_visits`
/// visits (never fewer than 1) are skipped before sampling. Tensors are
/// encoded on a `grid` x `grid` raster.
std::vector<TrainingSample> harvest(const SearchTree& tree, std::size_t per_tree, double tau,
                                    std::uint32_t min_visits = 1, int grid = kDefaultGrid);

/// Bounded FIFO store of training samples.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 50000);

  void add(TrainingSample sample);
  void add(std::vector<TrainingSample> samples);

  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return samples_.empty(); }
  const TrainingSample& operator[](std::size_t i) const { return samples_[i]; }
  void clear() { samples_.clear(); }

  /// `count` samples drawn uniformly with replacement.
  std::vector<TrainingSample> draw(std::size_t count, Rng& rng) const;

  /// Minibatches covering the buffer once in a random order. The last batch
  /// may be short.
  std::vector<std::vector<std::size_t>> epoch_batches(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<TrainingSample> samples_;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<std::string> validation;
};

/// Seeded shuffle then a 70/15/15 partition (train and test sizes rounded to
/// nearest, validation takes the rest). Throws for fewer than 3 ids.
DatasetSplit split_dataset(std::vector<std::string> ids, std::uint64_t seed);

/// Binary sample dump: "PKMS1", u32 version, u32 grid, u32 action count,
/// u64 sample count, then per sample the occupancy bytes, f64 gear,
/// f64 steer, action-count f64 policy entries and f64 r. Little-endian.
void save_samples(std::span<const TrainingSample> samples, const std::filesystem::path& path);
std::vector<TrainingSample> load_samples(const std::filesystem::path& path);

}  // namespace pkmc
