#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pkmc/data_pipeline.hpp"
#include "pkmc/evaluator.hpp"
#include "pkmc/mcts.hpp"
#include "pkmc/scenario.hpp"

namespace pkmc {

struct TrainConfig {
  std::size_t iterations = 8;
  std::size_t scenarios_per_iter = 30;
  std::size_t epochs = 2;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double tau = 1.0;
  std::size_t per_tree = 16;
  std::uint32_t min_visits = 1;
  std::size_t replay_capacity = 50000;
  std::uint64_t seed = 0;

  bool valid() const;
};

/// Linear-interpolation percentile (q in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

struct EvaluationSummary {
  std::size_t scenarios = 0;
  std::size_t solved = 0;
  double success_rate = 0.0;
  double median_nodes = 0.0;  // unsolved scenarios count as the node limit
  std::optional<double> median_ms;  // over solved scenarios; absent when none solved
  std::optional<double> p10_ms;
  std::optional<double> p90_ms;
  std::vector<std::size_t> nodes_to_first_path;  // per scenario, node limit when unsolved
};

/// run_search on every scenario with `evaluator`.
EvaluationSummary evaluate(std::span<const Scenario> scenarios, const Evaluator& evaluator,
                           const SearchConfig& config);

struct IterationReport {
  std::size_t iteration = 0;  // 1-based count of completed training rounds
  double median_nodes_to_first_path = 0.0;
  std::optional<double> median_ms;
  std::optional<double> p10_ms;
  std::optional<double> p90_ms;
  double success_rate = 0.0;
  double mean_loss = 0.0;
  std::string checkpoint;

  friend bool operator==(const IterationReport&, const IterationReport&) = default;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolicyIterationSetup {
  std::vector<Scenario> train;
  std::vector<Scenario> validation;
  TrainConfig train_config;
  SearchConfig search;            // used for training searches and validation
  NetworkShape shape;
  std::filesystem::path out_dir;  // checkpoints land here
  bool record_wall_time = true;   // false writes 0 for every time statistic
  /// Continue after this many finished iterations from `initial`.
  std::size_t first_iteration = 0;
  std::optional<NetworkParams> initial;
  /// Called after each iteration (e.g. to append a CSV row).
  std::function<void(const IterationReport&)> on_report;
};

/// The outer loop: search with the frozen current evaluator (uniform before
/// the first training round), harvest into the replay buffer, train, evaluate
/// on validation, checkpoint. Deterministic given the seed.
std::vector<IterationReport> run_policy_iteration(const PolicyIterationSetup& setup);

/// Checkpoint file name for a 1-based iteration, e.g. "iter-003.ckpt".
std::string checkpoint_name(std::size_t iteration);

/// Metrics CSV.
extern const char* const kMetricsHeader;
std::string metrics_row(const IterationReport& report);
IterationReport parse_metrics_row(const std::string& line);
void write_metrics_csv(std::span<const IterationReport> reports, std::ostream& out);
std::vector<IterationReport> read_metrics_csv(std::istream& in);

}  // namespace pkmc
