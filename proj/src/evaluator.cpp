#include "pkmc/evaluator.hpp"

#include "byte_io.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace pkmc {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Vec>;
using VecMap = Eigen::Map<Vec>;

double round_to_float(double x) { return static_cast<double>(static_cast<float>(x)); }

}  // namespace

// ---------------------------------------------------------------------------
// Encoding

double StateTensor::at(int channel, int iy, int ix) const {
  if (channel == kChannelGear) return gear;
  if (channel == kChannelSteer) return steer;
  const std::size_t plane = static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
  return occupancy[static_cast<std::size_t>(channel) * plane + static_cast<std::size_t>(iy * grid + ix)];
}

void StateTensor::dense(std::span<double> out) const {
  const std::size_t plane = static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
  for (std::size_t i = 0; i < kOccupancyChannels * plane; ++i) {
    out[i] = occupancy[i];
  }
  std::fill(out.begin() + kChannelGear * plane, out.begin() + (kChannelGear + 1) * plane, gear);
  std::fill(out.begin() + kChannelSteer * plane, out.begin() + (kChannelSteer + 1) * plane, steer);
}

std::vector<double> StateTensor::dense() const {
  std::vector<double> out(static_cast<std::size_t>(kInputChannels) * grid * grid);
  dense(out);
  return out;
}

ScenarioEncoder::ScenarioEncoder(const Scenario& scenario, int grid)
    : grid_(grid),
      origin_{scenario.bounds.min_x, scenario.bounds.min_y},
      resolution_(std::max(scenario.bounds.width(), scenario.bounds.height()) / grid),
      max_steer_(scenario.vehicle.max_steer),
      footprint_(scenario.vehicle.footprint) {
  const std::size_t plane = static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
  base_.assign(kOccupancyChannels * plane, 0);
  auto paint = [&](int channel, const ConvexPolygon& poly) {
    OccupancyLayer layer;
    layer.origin = origin_;
    layer.resolution = resolution_;
    layer.width = grid_;
    layer.height = grid_;
    layer.cells.assign(plane, 0);
    rasterize_into(layer, poly);
    for (std::size_t i = 0; i < plane; ++i) {
      base_[static_cast<std::size_t>(channel) * plane + i] |= layer.cells[i];
    }
  };
  for (const Obstacle& o : scenario.obstacles) {
    paint(static_cast<int>(o.cls), o.polygon);
  }
  paint(kChannelGoal, footprint_polygon(footprint_, scenario.goal));
}

StateTensor ScenarioEncoder::encode(const MotionState& current, const MotionState& parent) const {
  StateTensor t;
  t.grid = grid_;
  t.occupancy = base_;
  const std::size_t plane = static_cast<std::size_t>(grid_) * static_cast<std::size_t>(grid_);
  OccupancyLayer layer;
  layer.origin = origin_;
  layer.resolution = resolution_;
  layer.width = grid_;
  layer.height = grid_;
  for (auto [channel, state] : {std::pair{kChannelCurrent, &current}, std::pair{kChannelParent, &parent}}) {
    layer.cells.assign(plane, 0);
    rasterize_into(layer, footprint_polygon(footprint_, state->pose));
    std::copy(layer.cells.begin(), layer.cells.end(),
              t.occupancy.begin() + static_cast<std::ptrdiff_t>(channel * plane));
  }
  t.gear = current.gear == Gear::forward ? 1.0 : -1.0;
  t.steer = std::clamp(current.steer / max_steer_, -1.0, 1.0);
  return t;
}

StateTensor encode_state(const MotionState& current, const MotionState& parent, const Scenario& scenario,
                         int grid) {
  return ScenarioEncoder(scenario, grid).encode(current, parent);
}

// ---------------------------------------------------------------------------
// Shapes and parameters

NetworkShape NetworkShape::for_actions(const ActionSet& actions, int grid) {
  NetworkShape shape;
  shape.grid = grid;
  shape.action_count = static_cast<int>(actions.size());
  shape.steer_count = actions.steer_count();
  shape.step = actions.step();
  shape.max_steer = actions.max_steer();
  return shape;
}

bool NetworkShape::valid() const {
  return grid >= 8 && grid % 8 == 0 && conv_channels[0] > 0 && conv_channels[1] > 0 &&
         conv_channels[2] > 0 && feature > 0 && head_hidden > 0 && action_count > 0;
}

std::size_t NetworkShape::parameter_count() const { return ParamLayout(*this).total; }

ParamLayout::ParamLayout(const NetworkShape& s) {
  std::size_t cursor = 0;
  auto take = [&](std::size_t n, std::string name) {
    Block b{cursor, n, std::move(name)};
    cursor += n;
    return b;
  };
  int in = kInputChannels;
  for (std::size_t l = 0; l < 3; ++l) {
    const auto out = static_cast<std::size_t>(s.conv_channels[l]);
    const std::string prefix = "conv" + std::to_string(l + 1);
    conv_weight[l] = take(out * static_cast<std::size_t>(in) * 9, prefix + ".weight");
    gamma[l] = take(out, prefix + ".gamma");
    beta[l] = take(out, prefix + ".beta");
    in = s.conv_channels[l];
  }
  const auto side = static_cast<std::size_t>(s.final_side());
  const std::size_t flat = static_cast<std::size_t>(s.conv_channels[2]) * side * side;
  const auto feat = static_cast<std::size_t>(s.feature);
  const auto hid = static_cast<std::size_t>(s.head_hidden);
  const auto act = static_cast<std::size_t>(s.action_count);
  fc_weight = take(feat * flat, "fc.weight");
  fc_bias = take(feat, "fc.bias");
  policy1_weight = take(hid * feat, "policy1.weight");
  policy1_bias = take(hid, "policy1.bias");
  policy2_weight = take(act * hid, "policy2.weight");
  policy2_bias = take(act, "policy2.bias");
  value1_weight = take(hid * feat, "value1.weight");
  value1_bias = take(hid, "value1.bias");
  value2_weight = take(hid, "value2.weight");
  value2_bias = take(1, "value2.bias");
  total = cursor;
}

std::vector<ParamLayout::Block> ParamLayout::blocks() const {
  std::vector<Block> out;
  for (std::size_t l = 0; l < 3; ++l) {
    out.push_back(conv_weight[l]);
    out.push_back(gamma[l]);
    out.push_back(beta[l]);
  }
  for (const Block& b : {fc_weight, fc_bias, policy1_weight, policy1_bias, policy2_weight, policy2_bias,
                         value1_weight, value1_bias, value2_weight, value2_bias}) {
    out.push_back(b);
  }
  return out;
}

NetworkParams NetworkParams::zeros(const NetworkShape& shape) {
  if (!shape.valid()) {
    throw ShapeError("invalid network shape");
  }
  return NetworkParams{shape, std::vector<double>(shape.parameter_count(), 0.0)};
}

NetworkParams NetworkParams::random(const NetworkShape& shape, Rng& rng) {
  NetworkParams params = zeros(shape);
  const ParamLayout layout(shape);
  auto fill_uniform = [&](const ParamLayout::Block& b, double bound) {
    for (std::size_t i = 0; i < b.size; ++i) {
      params.values[b.offset + i] = round_to_float(rng.uniform(-bound, bound));
    }
  };
  auto he = [](std::size_t fan_in) { return std::sqrt(6.0 / static_cast<double>(fan_in)); };
  int in = kInputChannels;
  for (std::size_t l = 0; l < 3; ++l) {
    fill_uniform(layout.conv_weight[l], he(static_cast<std::size_t>(in) * 9));
    std::fill_n(params.values.begin() + static_cast<std::ptrdiff_t>(layout.gamma[l].offset),
                layout.gamma[l].size, 1.0);
    in = shape.conv_channels[l];
  }
  const std::size_t flat = layout.fc_weight.size / static_cast<std::size_t>(shape.feature);
  fill_uniform(layout.fc_weight, he(flat));
  fill_uniform(layout.policy1_weight, he(static_cast<std::size_t>(shape.feature)));
  fill_uniform(layout.value1_weight, he(static_cast<std::size_t>(shape.feature)));
  // Output layers start small so the first network is close to uniform.
  fill_uniform(layout.policy2_weight, 0.1 * he(static_cast<std::size_t>(shape.head_hidden)));
  fill_uniform(layout.value2_weight, 0.1 * he(static_cast<std::size_t>(shape.head_hidden)));
  return params;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

struct Trace {
  std::array<RowMat, 4> input;  // input[0] is the tensor, input[l+1] the output of block l
  std::array<RowMat, 3> cols;
  std::array<RowMat, 3> conv;   // before normalization
  std::array<RowMat, 3> norm;   // after normalization, before rectifier
  Vec fc_pre, feature, p1_pre, p1, logits, v1_pre, v1;
  Vec p;
  double v_pre = 0.0;
  double v = 0.5;
};

// 3x3, stride 2, zero padding 1. Rows index (channel, ky, kx), columns the
// output position oy * out_side + ox.
void im2col(const RowMat& x, int channels, int side, RowMat& cols) {
  const int out_side = side / 2;
  cols.resize(static_cast<Eigen::Index>(channels) * 9, static_cast<Eigen::Index>(out_side) * out_side);
  for (int c = 0; c < channels; ++c) {
    const double* plane = x.data() + static_cast<std::ptrdiff_t>(c) * side * side;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row = cols.data() + static_cast<std::ptrdiff_t>(c * 9 + ky * 3 + kx) * out_side * out_side;
        for (int oy = 0; oy < out_side; ++oy) {
          const int iy = 2 * oy + ky - 1;
          double* dst = row + static_cast<std::ptrdiff_t>(oy) * out_side;
          if (iy < 0 || iy >= side) {
            std::fill_n(dst, out_side, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::ptrdiff_t>(iy) * side;
          for (int ox = 0; ox < out_side; ++ox) {
            const int ix = 2 * ox + kx - 1;
            dst[ox] = (ix >= 0 && ix < side) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const RowMat& dcols, int channels, int side, RowMat& dx) {
  const int out_side = side / 2;
  dx.setZero(channels, static_cast<Eigen::Index>(side) * side);
  for (int c = 0; c < channels; ++c) {
    double* plane = dx.data() + static_cast<std::ptrdiff_t>(c) * side * side;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row =
            dcols.data() + static_cast<std::ptrdiff_t>(c * 9 + ky * 3 + kx) * out_side * out_side;
        for (int oy = 0; oy < out_side; ++oy) {
          const int iy = 2 * oy + ky - 1;
          if (iy < 0 || iy >= side) continue;
          const double* src = row + static_cast<std::ptrdiff_t>(oy) * out_side;
          double* dst = plane + static_cast<std::ptrdiff_t>(iy) * side;
          for (int ox = 0; ox < out_side; ++ox) {
            const int ix = 2 * ox + kx - 1;
            if (ix >= 0 && ix < side) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

Vec relu(const Vec& x) { return x.cwiseMax(0.0); }

class Network {
 public:
  Network(const NetworkParams& params) : params_(params), layout_(params.shape) {}

  void forward(const StateTensor& input, Trace& t) const {
    const NetworkShape& s = params_.shape;
    if (input.grid != s.grid) {
      throw ShapeError("input grid " + std::to_string(input.grid) + " does not match network grid " +
                       std::to_string(s.grid));
    }
    const double* w = params_.values.data();
    t.input[0].resize(kInputChannels, static_cast<Eigen::Index>(s.grid) * s.grid);
    input.dense(std::span<double>(t.input[0].data(), static_cast<std::size_t>(t.input[0].size())));

    int channels = kInputChannels;
    int side = s.grid;
    for (std::size_t l = 0; l < 3; ++l) {
      const int out = s.conv_channels[l];
      im2col(t.input[l], channels, side, t.cols[l]);
      ConstRowMap weight(w + layout_.conv_weight[l].offset, out, channels * 9);
      t.conv[l].noalias() = weight * t.cols[l];
      ConstVecMap gamma(w + layout_.gamma[l].offset, out);
      ConstVecMap beta(w + layout_.beta[l].offset, out);
      t.norm[l] = (t.conv[l].array().colwise() * gamma.array()).colwise() + beta.array();
      t.input[l + 1] = t.norm[l].cwiseMax(0.0);
      channels = out;
      side /= 2;
    }

    const ConstVecMap flat(t.input[3].data(), t.input[3].size());
    ConstRowMap fc_w(w + layout_.fc_weight.offset, s.feature, flat.size());
    t.fc_pre = fc_w * flat + ConstVecMap(w + layout_.fc_bias.offset, s.feature);
    t.feature = relu(t.fc_pre);

    ConstRowMap p1_w(w + layout_.policy1_weight.offset, s.head_hidden, s.feature);
    t.p1_pre = p1_w * t.feature + ConstVecMap(w + layout_.policy1_bias.offset, s.head_hidden);
    t.p1 = relu(t.p1_pre);
    ConstRowMap p2_w(w + layout_.policy2_weight.offset, s.action_count, s.head_hidden);
    t.logits = p2_w * t.p1 + ConstVecMap(w + layout_.policy2_bias.offset, s.action_count);
    const double max_logit = t.logits.maxCoeff();
    t.p = (t.logits.array() - max_logit).exp();
    t.p /= t.p.sum();

    ConstRowMap v1_w(w + layout_.value1_weight.offset, s.head_hidden, s.feature);
    t.v1_pre = v1_w * t.feature + ConstVecMap(w + layout_.value1_bias.offset, s.head_hidden);
    t.v1 = relu(t.v1_pre);
    t.v_pre = ConstVecMap(w + layout_.value2_weight.offset, s.head_hidden).dot(t.v1) +
              w[layout_.value2_bias.offset];
    t.v = 1.0 / (1.0 + std::exp(-t.v_pre));
  }

  /// Per-sample loss given a completed forward trace.
  static double sample_loss(const Trace& t, const TrainingSample& sample) {
    const double max_logit = t.logits.maxCoeff();
    const double log_z = max_logit + std::log((t.logits.array() - max_logit).exp().sum());
    double ce = 0.0;
    for (Eigen::Index a = 0; a < t.logits.size(); ++a) {
      const double pi = sample.pi[static_cast<std::size_t>(a)];
      if (pi != 0.0) {
        ce -= pi * (t.logits[a] - log_z);
      }
    }
    const double dv = t.v - sample.r;
    return ce + dv * dv;
  }

  /// Accumulates scale * d(sample loss)/d(params) into `grad`.
  void backward(const Trace& t, const TrainingSample& sample, double scale, std::vector<double>& grad) const {
    const NetworkShape& s = params_.shape;
    const double* w = params_.values.data();
    double* g = grad.data();

    Vec pi(s.action_count);
    for (int a = 0; a < s.action_count; ++a) pi[a] = sample.pi[static_cast<std::size_t>(a)];
    const double pi_sum = pi.sum();
    const Vec d_logits = scale * (pi_sum * t.p - pi);
    const double d_vpre = scale * 2.0 * (t.v - sample.r) * t.v * (1.0 - t.v);

    // Policy head.
    RowMap(g + layout_.policy2_weight.offset, s.action_count, s.head_hidden).noalias() +=
        d_logits * t.p1.transpose();
    VecMap(g + layout_.policy2_bias.offset, s.action_count) += d_logits;
    Vec d_p1 = ConstRowMap(w + layout_.policy2_weight.offset, s.action_count, s.head_hidden).transpose() * d_logits;
    d_p1 = (t.p1_pre.array() > 0.0).select(d_p1, 0.0);
    RowMap(g + layout_.policy1_weight.offset, s.head_hidden, s.feature).noalias() += d_p1 * t.feature.transpose();
    VecMap(g + layout_.policy1_bias.offset, s.head_hidden) += d_p1;
    Vec d_feature = ConstRowMap(w + layout_.policy1_weight.offset, s.head_hidden, s.feature).transpose() * d_p1;

    // Value head.
    const ConstVecMap v2_w(w + layout_.value2_weight.offset, s.head_hidden);
    VecMap(g + layout_.value2_weight.offset, s.head_hidden) += d_vpre * t.v1;
    g[layout_.value2_bias.offset] += d_vpre;
    Vec d_v1 = d_vpre * v2_w;
    d_v1 = (t.v1_pre.array() > 0.0).select(d_v1, 0.0);
    RowMap(g + layout_.value1_weight.offset, s.head_hidden, s.feature).noalias() += d_v1 * t.feature.transpose();
    VecMap(g + layout_.value1_bias.offset, s.head_hidden) += d_v1;
    d_feature.noalias() += ConstRowMap(w + layout_.value1_weight.offset, s.head_hidden, s.feature).transpose() * d_v1;

    // Shared feature projection.
    const Vec d_fc = (t.fc_pre.array() > 0.0).select(d_feature, 0.0);
    const ConstVecMap flat(t.input[3].data(), t.input[3].size());
    RowMap(g + layout_.fc_weight.offset, s.feature, flat.size()).noalias() += d_fc * flat.transpose();
    VecMap(g + layout_.fc_bias.offset, s.feature) += d_fc;
    const Vec d_flat = ConstRowMap(w + layout_.fc_weight.offset, s.feature, flat.size()).transpose() * d_fc;

    // Convolution blocks, last to first.
    RowMat d_out = Eigen::Map<const RowMat>(d_flat.data(), t.input[3].rows(), t.input[3].cols());
    std::array<int, 4> channels{kInputChannels, s.conv_channels[0], s.conv_channels[1], s.conv_channels[2]};
    std::array<int, 4> sides{s.grid, s.grid / 2, s.grid / 4, s.grid / 8};
    for (int l = 2; l >= 0; --l) {
      const auto lu = static_cast<std::size_t>(l);
      const int out = channels[lu + 1];
      const RowMat d_norm = (t.norm[lu].array() > 0.0).select(d_out, 0.0);
      VecMap(g + layout_.beta[lu].offset, out) += d_norm.rowwise().sum();
      VecMap(g + layout_.gamma[lu].offset, out) += d_norm.cwiseProduct(t.conv[lu]).rowwise().sum();
      const ConstVecMap gamma(w + layout_.gamma[lu].offset, out);
      const RowMat d_conv = d_norm.array().colwise() * gamma.array();
      RowMap(g + layout_.conv_weight[lu].offset, out, channels[lu] * 9).noalias() +=
          d_conv * t.cols[lu].transpose();
      if (l > 0) {
        const RowMat d_cols =
            ConstRowMap(w + layout_.conv_weight[lu].offset, out, channels[lu] * 9).transpose() * d_conv;
        col2im_add(d_cols, channels[lu], sides[lu], d_out);
      }
    }
  }

 private:
  const NetworkParams& params_;
  ParamLayout layout_;
};

void check_batch(const NetworkParams& params, std::span<const TrainingSample> batch) {
  if (batch.empty()) {
    throw std::invalid_argument("empty training batch");
  }
  for (const TrainingSample& sample : batch) {
    if (sample.pi.size() != static_cast<std::size_t>(params.shape.action_count)) {
      throw ShapeError("policy label length does not match the action count");
    }
  }
}

}  // namespace

Evaluation forward(const NetworkParams& params, const StateTensor& input) {
  Trace trace;
  Network(params).forward(input, trace);
  Evaluation e;
  e.p.assign(trace.p.data(), trace.p.data() + trace.p.size());
  e.v = trace.v;
  return e;
}

double loss(const NetworkParams& params, std::span<const TrainingSample> batch) {
  check_batch(params, batch);
  const Network net(params);
  Trace trace;
  double total = 0.0;
  for (const TrainingSample& sample : batch) {
    net.forward(sample.tensor, trace);
    total += Network::sample_loss(trace, sample);
  }
  return total / static_cast<double>(batch.size());
}

std::vector<bool> rectifier_pattern(const NetworkParams& params, std::span<const TrainingSample> batch) {
  check_batch(params, batch);
  const Network net(params);
  Trace trace;
  std::vector<bool> on;
  auto push = [&on](const double* v, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) on.push_back(v[i] > 0.0);
  };
  for (const TrainingSample& sample : batch) {
    net.forward(sample.tensor, trace);
    for (const RowMat& m : trace.norm) push(m.data(), m.size());
    push(trace.fc_pre.data(), trace.fc_pre.size());
    push(trace.p1_pre.data(), trace.p1_pre.size());
    push(trace.v1_pre.data(), trace.v1_pre.size());
  }
  return on;
}

double loss_and_gradient(const NetworkParams& params, std::span<const TrainingSample> batch,
                         std::vector<double>& gradient) {
  check_batch(params, batch);
  gradient.assign(params.values.size(), 0.0);
  const Network net(params);
  const double scale = 1.0 / static_cast<double>(batch.size());
  Trace trace;
  double total = 0.0;
  for (const TrainingSample& sample : batch) {
    net.forward(sample.tensor, trace);
    total += Network::sample_loss(trace, sample);
    net.backward(trace, sample, scale, gradient);
  }
  return total * scale;
}

double train_step(NetworkParams& params, MomentumSgd& optimizer, std::span<const TrainingSample> batch,
                  double learning_rate) {
  std::vector<double> gradient;
  const double before = loss_and_gradient(params, batch, gradient);
  if (!std::isfinite(before) ||
      !std::all_of(gradient.begin(), gradient.end(), [](double x) { return std::isfinite(x); })) {
    throw NonFiniteGradient("train_step: non-finite loss or gradient");
  }
  if (optimizer.velocity.size() != gradient.size()) {
    optimizer.velocity.assign(gradient.size(), 0.0);
  }
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    optimizer.velocity[i] = optimizer.momentum * optimizer.velocity[i] + gradient[i];
    params.values[i] = round_to_float(params.values[i] - learning_rate * optimizer.velocity[i]);
  }
  return before;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[5] = {'P', 'K', 'M', 'C', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

using detail::put_le;
using Reader = detail::LeReader<CheckpointError>;

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const NetworkParams& params) {
  const NetworkShape& s = params.shape;
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.grid));
  for (int c : s.conv_channels) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.feature));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.head_hidden));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.action_count));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.steer_count));
  put_le<double>(out, s.step);
  put_le<double>(out, s.max_steer);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.values.size()));
  out.reserve(out.size() + 4 * params.values.size());
  for (double v : params.values) put_le<float>(out, static_cast<float>(v));
  return out;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
  detail::write_file<CheckpointError>(path, serialize_checkpoint(params));
}

NetworkParams deserialize_checkpoint(std::span<const std::uint8_t> bytes, const NetworkShape* expected) {
  if (bytes.size() < sizeof(kMagic) || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw CheckpointError("not a checkpoint (magic mismatch)");
  }
  Reader in(bytes.subspan(sizeof(kMagic)));
  const auto version = in.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  NetworkShape s;
  s.grid = static_cast<int>(in.get<std::uint32_t>("grid"));
  for (int& c : s.conv_channels) c = static_cast<int>(in.get<std::uint32_t>("conv channels"));
  s.feature = static_cast<int>(in.get<std::uint32_t>("feature"));
  s.head_hidden = static_cast<int>(in.get<std::uint32_t>("head_hidden"));
  s.action_count = static_cast<int>(in.get<std::uint32_t>("action_count"));
  s.steer_count = static_cast<int>(in.get<std::uint32_t>("steer_count"));
  s.step = in.get<double>("step");
  s.max_steer = in.get<double>("max_steer");
  const auto count = in.get<std::uint64_t>("parameter count");
  if (!s.valid() || count != s.parameter_count()) {
    throw CheckpointError("checkpoint metadata is inconsistent");
  }
  if (expected != nullptr && !(s == *expected)) {
    throw ShapeError("checkpoint shape (actions=" + std::to_string(s.action_count) +
                     ", steer_count=" + std::to_string(s.steer_count) +
                     ") does not match the configured network (actions=" +
                     std::to_string(expected->action_count) +
                     ", steer_count=" + std::to_string(expected->steer_count) + ")");
  }
  if (in.remaining() != count * sizeof(float)) {
    throw CheckpointError("checkpoint truncated or has trailing bytes");
  }
  NetworkParams params{s, std::vector<double>(count)};
  for (double& v : params.values) v = static_cast<double>(in.get<float>("parameters"));
  return params;
}

NetworkParams load_checkpoint(const std::filesystem::path& path, const NetworkShape* expected) {
  return deserialize_checkpoint(detail::read_file<CheckpointError>(path), expected);
}

// ---------------------------------------------------------------------------
// Evaluators

namespace {

class UniformSession final : public EvaluationSession {
 public:
  explicit UniformSession(std::size_t n) : uniform_(n, 1.0 / static_cast<double>(n)) {}
  Evaluation evaluate(const MotionState&, const MotionState&) override { return Evaluation{uniform_, 0.5}; }

 private:
  std::vector<double> uniform_;
};

class NetworkSession final : public EvaluationSession {
 public:
  NetworkSession(std::shared_ptr<const NetworkParams> params, const Scenario& scenario)
      : params_(std::move(params)), encoder_(scenario, params_->shape.grid), net_(*params_) {}

  Evaluation evaluate(const MotionState& current, const MotionState& parent) override {
    net_.forward(encoder_.encode(current, parent), trace_);
    Evaluation e;
    e.p.assign(trace_.p.data(), trace_.p.data() + trace_.p.size());
    e.v = trace_.v;
    return e;
  }

 private:
  std::shared_ptr<const NetworkParams> params_;
  ScenarioEncoder encoder_;
  Network net_;
  Trace trace_;
};

}  // namespace

UniformEvaluator::UniformEvaluator(std::size_t action_count) : action_count_(action_count) {
  if (action_count == 0) {
    throw std::invalid_argument("uniform evaluator needs at least one action");
  }
}

std::unique_ptr<EvaluationSession> UniformEvaluator::open(const Scenario&) const {
  return std::make_unique<UniformSession>(action_count_);
}

std::unique_ptr<Evaluator> uniform_evaluator(std::size_t action_count) {
  return std::make_unique<UniformEvaluator>(action_count);
}

NetworkEvaluator::NetworkEvaluator(std::shared_ptr<const NetworkParams> params) : params_(std::move(params)) {
  if (!params_) {
    throw std::invalid_argument("network evaluator needs parameters");
  }
}

std::size_t NetworkEvaluator::action_count() const {
  return static_cast<std::size_t>(params_->shape.action_count);
}

std::unique_ptr<EvaluationSession> NetworkEvaluator::open(const Scenario& scenario) const {
  return std::make_unique<NetworkSession>(params_, scenario);
}

}  // namespace pkmc
