#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "causalrisk/dataset.hpp"
#include "causalrisk/graph.hpp"
#include "causalrisk/risk.hpp"

namespace causalrisk {

enum class LearnerKind { Empty, ACor, GreedyBic, External };

struct LearnerConfig {
  LearnerKind kind = LearnerKind::Empty;
  // ACor only; the harness fills it from the generating setting when unset.
  std::optional<double> ens_oracle;
  // External only: executable followed by fixed leading arguments.
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{std::chrono::minutes(10)};
  // GreedyBic tuning.
  int max_iters = 10'000;
  double score_penalty = 1.0;
  int max_parents = 10;
};

// "empty", "acor", "greedy-bic", or "external:<path> [args...]". Throws UsageError.
LearnerConfig parse_learner_spec(std::string_view spec);
std::string learner_id(const LearnerConfig& config);

// Pearson correlation matrix of the columns; NaN for pairs involving a constant column.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data);
Eigen::MatrixXd correlation_matrix_serial(const Eigen::MatrixXd& data);

// Single undirected edge on the pair with the largest |correlation| in the observational block.
MixedGraph fit_empty(const MultiRegimeDataset& d);

// Undirected graph on the round(p * ens / 2) pairs with the largest |correlation|.
MixedGraph fit_acor(const MultiRegimeDataset& d, double ens_oracle);

struct GreedyBicOptions {
  int max_iters = 10'000;
  double score_penalty = 1.0;
  int max_parents = 10;
};

struct GreedyBicResult {
  MixedGraph graph;
  // Total score after each accepted move, starting with the empty graph.
  std::vector<double> score_trace;
  int iterations = 0;
};

// Gaussian BIC hill climbing over DAGs with single-edge add/remove/reverse moves.
GreedyBicResult greedy_bic_search(const Eigen::MatrixXd& data, const GreedyBicOptions& options);
// Gaussian BIC local score of node i given parents (higher is better); nullopt when singular.
std::optional<double> bic_local_score(const Eigen::MatrixXd& covariance, std::size_t n, Node i,
                                      const NodeSet& parents, double penalty);

MixedGraph fit_greedy_bic(const MultiRegimeDataset& d, const LearnerConfig& config);

// Runs `command data.csv specs.json out.adj` in a fresh temporary directory and reads out.adj.
MixedGraph fit_external(const MultiRegimeDataset& d, const std::vector<std::string>& command,
                        std::chrono::milliseconds timeout);

std::unique_ptr<Learner> make_learner(const LearnerConfig& config);

// Learner that always returns the same graph; handy for experiments and tests.
class FixedGraphLearner final : public Learner {
 public:
  FixedGraphLearner(std::string id, MixedGraph graph) : id_(std::move(id)), graph_(std::move(graph)) {}
  std::string id() const override { return id_; }
  MixedGraph fit(const MultiRegimeDataset&) const override { return graph_; }

 private:
  std::string id_;
  MixedGraph graph_;
};

}  // namespace causalrisk
