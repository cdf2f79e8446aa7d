#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "causalrisk/dataset.hpp"
#include "causalrisk/graph.hpp"

namespace causalrisk {

enum class CorrectionScope { PerIntervention, Global };
enum class CutoffDistribution { Normal, StudentT };

// Two-sample statistic; descendants are the columns whose |statistic| exceeds the cutoff.
using TwoSampleStatistic = std::function<double(std::span<const double>, std::span<const double>)>;

struct DescendantOptions {
  double alpha = 0.05;
  CorrectionScope scope = CorrectionScope::PerIntervention;
  CutoffDistribution distribution = CutoffDistribution::Normal;
  // Map every column through the observational empirical distribution (normal scores) before
  // testing, so skewed observational marginals no longer distort the mean comparison.
  bool center_on_observational = false;
  // Empty means Welch's t.
  TwoSampleStatistic statistic;
};

struct DescendantEstimate {
  Node source = 0;
  NodeSet members;
  // Indexed by node; NaN at the source.
  std::vector<double> statistics;
  double cutoff = 0.0;
  // Columns where both samples were constant.
  NodeSet degenerate;
};

using DescendantMap = std::map<Node, DescendantEstimate>;

// (mean(x) - mean(y)) / sqrt(s_x^2/|x| + s_y^2/|y|) with unbiased variances.
// Both samples constant: 0 if the means agree, otherwise +-infinity.
// Throws DataError when either sample has fewer than 2 values.
double welch_t(std::span<const double> x, std::span<const double> y);

// Two-sided per-test critical value for family level alpha split over `tests` tests.
double bonferroni_cutoff(double alpha, int tests, CutoffDistribution distribution,
                         double degrees_of_freedom = 0.0);

// Tests column j of the observational block against column j of block i for every j != i.
// `p - 1` (or |iota| (p - 1) under the global scope) tests share alpha.
DescendantEstimate estimate_descendants(const MultiRegimeDataset& d, Node i,
                                        const DescendantOptions& options = {});
DescendantMap estimate_all_descendants(const MultiRegimeDataset& d,
                                       const DescendantOptions& options = {});

// Ground-truth descendants dressed as an estimate (statistics NaN, cutoff NaN).
DescendantEstimate oracle_descendant_estimate(const Dag& truth, Node i);
DescendantMap oracle_descendant_map(const Dag& truth, const std::vector<Node>& iota);

nlohmann::json to_json(const DescendantEstimate& estimate);

// Per-column statistics of `sample` against `reference`, skipping column `skip` (NaN there).
// The OpenMP kernel and its serial reference return identical vectors.
std::vector<double> column_statistics(const Eigen::MatrixXd& reference,
                                      const Eigen::MatrixXd& sample, Node skip,
                                      const TwoSampleStatistic& statistic = {});
std::vector<double> column_statistics_serial(const Eigen::MatrixXd& reference,
                                             const Eigen::MatrixXd& sample, Node skip,
                                             const TwoSampleStatistic& statistic = {});

// Normal scores of `values` under the empirical distribution of `reference`:
// Phi^-1((#{r < v} + (#{r == v} + 1) / 2) / (n + 1)).
std::vector<double> observational_normal_scores(std::span<const double> reference,
                                                std::span<const double> values);

}  // namespace causalrisk
