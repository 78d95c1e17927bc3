#include "pkmc/policy_iteration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

namespace pkmc {

bool TrainConfig::valid() const {
  return iterations > 0 && scenarios_per_iter > 0 && epochs > 0 && batch_size > 0 && learning_rate > 0.0 &&
         momentum >= 0.0 && momentum < 1.0 && tau > 0.0 && per_tree > 0 && min_visits > 0 && replay_capacity > 0;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("percentile of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EvaluationSummary evaluate(std::span<const Scenario> scenarios, const Evaluator& evaluator,
                           const SearchConfig& config) {
  if (scenarios.empty()) {
    throw std::invalid_argument("evaluate: empty scenario list");
  }
  EvaluationSummary summary;
  std::vector<double> nodes;
  std::vector<double> times;
  for (const Scenario& s : scenarios) {
    const SearchResult r = run_search(s, evaluator, config);
    const std::size_t first = r.nodes_to_first_path.value_or(config.node_limit);
    summary.nodes_to_first_path.push_back(first);
    nodes.push_back(static_cast<double>(first));
    if (r.best_path) {
      ++summary.solved;
      times.push_back(r.wall_ms);
    }
  }
  summary.scenarios = scenarios.size();
  summary.success_rate = static_cast<double>(summary.solved) / static_cast<double>(summary.scenarios);
  summary.median_nodes = percentile(nodes, 0.5);
  if (!times.empty()) {
    summary.median_ms = percentile(times, 0.5);
    summary.p10_ms = percentile(times, 0.1);
    summary.p90_ms = percentile(times, 0.9);
  }
  return summary;
}

std::string checkpoint_name(std::size_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter-%03zu.ckpt", iteration);
  return buf;
}

std::vector<IterationReport> run_policy_iteration(const PolicyIterationSetup& setup) {
  const TrainConfig& cfg = setup.train_config;
  if (!cfg.valid()) throw std::invalid_argument("invalid training configuration");
  if (setup.train.empty() || setup.validation.empty()) {
    throw std::invalid_argument("policy iteration needs nonempty training and validation sets");
  }
  if (!setup.shape.valid() || static_cast<std::size_t>(setup.shape.action_count) != setup.search.actions.size()) {
    throw ShapeError("network shape does not match the search action set");
  }

  NetworkParams params;
  if (setup.initial) {
    if (!(setup.initial->shape == setup.shape)) throw ShapeError("initial parameters have a different shape");
    params = *setup.initial;
  } else {
    Rng init(mix_seed(cfg.seed, 0x1417));
    params = NetworkParams::random(setup.shape, init);
  }
  // The very first search round uses the prior-free evaluator.
  const bool trained = setup.first_iteration > 0 || setup.initial.has_value();

  MomentumSgd optimizer;
  optimizer.momentum = cfg.momentum;
  ReplayBuffer buffer(cfg.replay_capacity);
  std::vector<IterationReport> reports;
  const UniformEvaluator uniform(setup.search.actions.size());

  for (std::size_t k = setup.first_iteration; k < setup.first_iteration + cfg.iterations; ++k) {
    Rng rng(mix_seed(cfg.seed, 0x100 + k));

    // (1) search with a frozen snapshot.
    const auto snapshot = std::make_shared<const NetworkParams>(params);
    const NetworkEvaluator network(snapshot);
    const Evaluator& current = (k == 0 && !trained) ? static_cast<const Evaluator&>(uniform) : network;
    std::vector<std::size_t> order(setup.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    order.resize(std::min(order.size(), cfg.scenarios_per_iter));
    std::size_t harvested = 0;
    for (std::size_t i : order) {
      const SearchResult r = run_search(setup.train[i], current, setup.search);
      std::vector<TrainingSample> samples = harvest(*r.tree, cfg.per_tree, cfg.tau, cfg.min_visits, setup.shape.grid);
      harvested += samples.size();
      // (2) single writer into the buffer.
      buffer.add(std::move(samples));
    }
    if (harvested == 0) {
      throw TrainingError("iteration " + std::to_string(k + 1) +
                          " harvested no samples; no search produced both good and bad nodes");
    }

    // (3) train.
    const std::size_t steps_per_epoch = std::max<std::size_t>(1, buffer.size() / cfg.batch_size);
    double loss_sum = 0.0;
    std::size_t steps = 0;
    std::vector<TrainingSample> batch;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      const auto batches = buffer.epoch_batches(cfg.batch_size, rng);
      for (std::size_t b = 0; b < steps_per_epoch && b < batches.size(); ++b) {
        batch.clear();
        for (std::size_t idx : batches[b]) batch.push_back(buffer[idx]);
        loss_sum += train_step(params, optimizer, batch, cfg.learning_rate);
        ++steps;
      }
    }

    // (4) validation with the freshly trained parameters.
    const NetworkEvaluator trained_eval(std::make_shared<const NetworkParams>(params));
    const EvaluationSummary summary = evaluate(setup.validation, trained_eval, setup.search);

    // (5) checkpoint.
    IterationReport report;
    report.iteration = k + 1;
    report.checkpoint = checkpoint_name(k + 1);
    if (!setup.out_dir.empty()) save_checkpoint(params, setup.out_dir / report.checkpoint);
    report.median_nodes_to_first_path = summary.median_nodes;
    report.success_rate = summary.success_rate;
    report.mean_loss = loss_sum / static_cast<double>(steps);
    if (summary.median_ms) {
      report.median_ms = setup.record_wall_time ? *summary.median_ms : 0.0;
      report.p10_ms = setup.record_wall_time ? *summary.p10_ms : 0.0;
      report.p90_ms = setup.record_wall_time ? *summary.p90_ms : 0.0;
    }
    if (setup.on_report) setup.on_report(report);
    reports.push_back(std::move(report));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Metrics CSV

const char* const kMetricsHeader = "iter,median_nodes,median_ms,p10_ms,p90_ms,success_rate,mean_loss,checkpoint";

namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

double parse_number(const std::string& field, const char* name) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) {
    throw std::invalid_argument(std::string("metrics CSV: bad ") + name + " '" + field + "'");
  }
  return v;
}

}  // namespace

std::string metrics_row(const IterationReport& r) {
  if (r.checkpoint.find_first_of(",\n\"") != std::string::npos) {
    throw std::invalid_argument("checkpoint name must not contain commas, quotes or newlines");
  }
  return std::to_string(r.iteration) + "," + number(r.median_nodes_to_first_path) + "," +
         optional_number(r.median_ms) + "," + optional_number(r.p10_ms) + "," + optional_number(r.p90_ms) + "," +
         number(r.success_rate) + "," + number(r.mean_loss) + "," + r.checkpoint;
}

IterationReport parse_metrics_row(const std::string& line) {
  std::vector<std::string> f;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 8) {
    throw std::invalid_argument("metrics CSV: expected 8 fields, got " + std::to_string(f.size()));
  }
  IterationReport r;
  r.iteration = static_cast<std::size_t>(parse_number(f[0], "iter"));
  r.median_nodes_to_first_path = parse_number(f[1], "median_nodes");
  if (!f[2].empty()) r.median_ms = parse_number(f[2], "median_ms");
  if (!f[3].empty()) r.p10_ms = parse_number(f[3], "p10_ms");
  if (!f[4].empty()) r.p90_ms = parse_number(f[4], "p90_ms");
  r.success_rate = parse_number(f[5], "success_rate");
  r.mean_loss = parse_number(f[6], "mean_loss");
  r.checkpoint = f[7];
  return r;
}

void write_metrics_csv(std::span<const IterationReport> reports, std::ostream& out) {
  out << kMetricsHeader << '\n';
  for (const IterationReport& r : reports) out << metrics_row(r) << '\n';
}

std::vector<IterationReport> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw std::invalid_argument("metrics CSV: missing or wrong header");
  }
  std::vector<IterationReport> out;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_metrics_row(line));
  }
  return out;
}

}  // namespace pkmc
