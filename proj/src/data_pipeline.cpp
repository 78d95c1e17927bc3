#include "pkmc/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "byte_io.hpp"

namespace pkmc {

NodeLabels label_nodes(const SearchTree& tree) {
  std::vector<char> good(tree.node_count(), 0);
  for (const TreeNode& n : tree.nodes()) {
    if (!n.dest_connected) continue;
    for (NodeId id = n.id; id != kNoNode && !good[static_cast<std::size_t>(id)]; id = tree.node(id).parent) {
      good[static_cast<std::size_t>(id)] = 1;
    }
  }
  NodeLabels labels;
  for (const TreeNode& n : tree.nodes()) {
    if (good[static_cast<std::size_t>(n.id)]) {
      labels.good.push_back(n.id);
    } else if (n.status == NodeStatus::explored) {
      labels.bad.push_back(n.id);
    }
  }
  return labels;
}

double fps_distance(const Pose& a, const Pose& b, double heading_weight) {
  return distance(a.position, b.position) + heading_weight * std::fabs(normalize_angle(a.heading - b.heading));
}

std::vector<std::size_t> fps_sample_poses(std::span<const Pose> poses, std::span<const std::size_t> ids,
                                          std::size_t k) {
  if (poses.size() != ids.size()) {
    throw std::invalid_argument("fps_sample: pose and id lists differ in length");
  }
  const std::size_t n = poses.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

  std::vector<std::size_t> picked;
  if (n == 0 || k == 0) return picked;
  const std::size_t want = std::min(k, n);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  std::size_t next = order.front();
  for (;;) {
    picked.push_back(ids[next]);
    taken[next] = 1;
    if (picked.size() == want) break;
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i : order) {
      if (taken[i]) continue;
      nearest[i] = std::min(nearest[i], fps_distance(poses[i], poses[next]));
      if (nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    next = best;
  }
  return picked;
}

std::vector<NodeId> fps_sample(const SearchTree& tree, std::span<const NodeId> nodes, std::size_t k) {
  std::vector<Pose> poses;
  std::vector<std::size_t> ids;
  poses.reserve(nodes.size());
  ids.reserve(nodes.size());
  for (NodeId id : nodes) {
    poses.push_back(tree.node(id).state.pose);
    ids.push_back(static_cast<std::size_t>(id));
  }
  std::vector<NodeId> out;
  for (std::size_t id : fps_sample_poses(poses, ids, k)) out.push_back(static_cast<NodeId>(id));
  return out;
}

std::vector<double> policy_label(std::span<const std::uint32_t> visits, double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("policy_label: tau must be positive");
  }
  const std::uint32_t top = visits.empty() ? 0 : *std::max_element(visits.begin(), visits.end());
  if (top == 0) {
    throw std::invalid_argument("policy_label: all visit counts are zero");
  }
  // Scaling by the largest count keeps N^(1/tau) finite for small tau.
  std::vector<double> pi(visits.size(), 0.0);
  double sum = 0.0;
  for (std::size_t a = 0; a < visits.size(); ++a) {
    if (visits[a] == 0) continue;
    pi[a] = std::pow(static_cast<double>(visits[a]) / static_cast<double>(top), 1.0 / tau);
    sum += pi[a];
  }
  for (double& p : pi) p /= sum;
  return pi;
}

std::vector<double> policy_label(const TreeNode& node, double tau) { return policy_label(node.edge_visits, tau); }

std::vector<TrainingSample> harvest(const SearchTree& tree, std::size_t per_tree, double tau,
                                    std::uint32_t min_visits, int grid) {
  NodeLabels labels = label_nodes(tree);
  const std::uint32_t least = std::max<std::uint32_t>(1, min_visits);
  auto unvisited = [&](NodeId id) { return tree.node(id).visits < least; };
  std::erase_if(labels.good, unvisited);
  std::erase_if(labels.bad, unvisited);
  const std::size_t k = std::min({per_tree, labels.good.size(), labels.bad.size()});
  std::vector<TrainingSample> samples;
  if (k == 0) return samples;

  const ScenarioEncoder encoder(tree.scenario(), grid);
  auto emit = [&](NodeId id, double r) {
    const TreeNode& n = tree.node(id);
    const MotionState& parent = n.parent == kNoNode ? n.state : tree.node(n.parent).state;
    samples.push_back(TrainingSample{encoder.encode(n.state, parent), policy_label(n, tau), r});
  };
  for (NodeId id : fps_sample(tree, labels.good, k)) emit(id, 1.0);
  for (NodeId id : fps_sample(tree, labels.bad, k)) emit(id, 0.0);
  return samples;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("replay buffer capacity must be positive");
  }
}

void ReplayBuffer::add(TrainingSample sample) {
  if (samples_.size() == capacity_) {
    samples_.pop_front();
  }
  samples_.push_back(std::move(sample));
}

void ReplayBuffer::add(std::vector<TrainingSample> samples) {
  for (TrainingSample& s : samples) add(std::move(s));
}

std::vector<TrainingSample> ReplayBuffer::draw(std::size_t count, Rng& rng) const {
  std::vector<TrainingSample> out;
  if (samples_.empty()) return out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(samples_[rng.below(samples_.size())]);
  return out;
}

std::vector<std::vector<std::size_t>> ReplayBuffer::epoch_batches(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0) {
    throw std::invalid_argument("batch size must be positive");
  }
  std::vector<std::size_t> order(samples_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
  }
  return batches;
}

DatasetSplit split_dataset(std::vector<std::string> ids, std::uint64_t seed) {
  if (ids.size() < 3) {
    throw std::invalid_argument("split_dataset needs at least 3 scenarios");
  }
  Rng rng(seed);
  rng.shuffle(ids);
  const double n = static_cast<double>(ids.size());
  auto n_train = static_cast<std::size_t>(std::lround(0.70 * n));
  auto n_test = static_cast<std::size_t>(std::lround(0.15 * n));
  // Keep every part nonempty when rounding would starve one.
  n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 2);
  n_test = std::clamp<std::size_t>(n_test, 1, ids.size() - n_train - 1);
  DatasetSplit split;
  auto it = ids.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
  it += static_cast<std::ptrdiff_t>(n_train);
  split.test.assign(it, it + static_cast<std::ptrdiff_t>(n_test));
  it += static_cast<std::ptrdiff_t>(n_test);
  split.validation.assign(it, ids.end());
  return split;
}

namespace {

constexpr char kSampleMagic[5] = {'P', 'K', 'M', 'S', '1'};
constexpr std::uint32_t kSampleVersion = 1;

}  // namespace

void save_samples(std::span<const TrainingSample> samples, const std::filesystem::path& path) {
  using detail::put_le;
  const int grid = samples.empty() ? kDefaultGrid : samples.front().tensor.grid;
  const std::size_t actions = samples.empty() ? 0 : samples.front().pi.size();
  std::vector<std::uint8_t> out(std::begin(kSampleMagic), std::end(kSampleMagic));
  put_le<std::uint32_t>(out, kSampleVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(actions));
  put_le<std::uint64_t>(out, samples.size());
  for (const TrainingSample& s : samples) {
    if (s.tensor.grid != grid || s.pi.size() != actions) {
      throw std::invalid_argument("save_samples: samples differ in shape");
    }
    out.insert(out.end(), s.tensor.occupancy.begin(), s.tensor.occupancy.end());
    put_le<double>(out, s.tensor.gear);
    put_le<double>(out, s.tensor.steer);
    for (double p : s.pi) put_le<double>(out, p);
    put_le<double>(out, s.r);
  }
  detail::write_file<std::runtime_error>(path, out);
}

std::vector<TrainingSample> load_samples(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file<std::runtime_error>(path);
  if (bytes.size() < sizeof(kSampleMagic) ||
      !std::equal(std::begin(kSampleMagic), std::end(kSampleMagic), bytes.begin())) {
    throw std::runtime_error("not a sample file (magic mismatch)");
  }
  detail::LeReader<std::runtime_error> in(std::span<const std::uint8_t>(bytes).subspan(sizeof(kSampleMagic)));
  if (in.get<std::uint32_t>("version") != kSampleVersion) {
    throw std::runtime_error("unsupported sample file version");
  }
  const int grid = static_cast<int>(in.get<std::uint32_t>("grid"));
  const std::size_t actions = in.get<std::uint32_t>("action count");
  const std::uint64_t count = in.get<std::uint64_t>("sample count");
  const std::size_t plane = static_cast<std::size_t>(kOccupancyChannels) * static_cast<std::size_t>(grid) *
                            static_cast<std::size_t>(grid);
  std::vector<TrainingSample> samples;
  for (std::uint64_t i = 0; i < count; ++i) {
    TrainingSample s;
    s.tensor.grid = grid;
    auto occ = in.take(plane, "occupancy");
    s.tensor.occupancy.assign(occ.begin(), occ.end());
    s.tensor.gear = in.get<double>("gear");
    s.tensor.steer = in.get<double>("steer");
    s.pi.resize(actions);
    for (double& p : s.pi) p = in.get<double>("policy");
    s.r = in.get<double>("r");
    samples.push_back(std::move(s));
  }
  if (in.remaining() != 0) {
    throw std::runtime_error("sample file has trailing bytes");
  }
  return samples;
}

}  // namespace pkmc
