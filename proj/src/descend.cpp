#include "causalrisk/descend.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "causalrisk/error.hpp"

namespace causalrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

Moments moments(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(v.size() - 1)};
}

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
  return {m.data() + j * m.rows(), static_cast<std::size_t>(m.rows())};
}

double apply_statistic(const TwoSampleStatistic& statistic, std::span<const double> x,
                       std::span<const double> y) {
  return statistic ? statistic(x, y) : welch_t(x, y);
}

void check_shapes(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& sample) {
  if (reference.cols() != sample.cols()) throw DataError("samples have different column counts");
}

}  // namespace

double welch_t(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw DataError("Welch t needs at least 2 values per sample");
  const Moments mx = moments(x);
  const Moments my = moments(y);
  const double diff = mx.mean - my.mean;
  const double se2 = mx.variance / static_cast<double>(x.size()) + my.variance / static_cast<double>(y.size());
  if (se2 == 0.0) {
    if (diff == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return diff / std::sqrt(se2);
}

double bonferroni_cutoff(double alpha, int tests, CutoffDistribution distribution,
                         double degrees_of_freedom) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  if (tests < 1) throw DataError("at least one test is required for a cutoff");
  const double tail = alpha / static_cast<double>(tests) / 2.0;
  if (distribution == CutoffDistribution::Normal) {
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), tail));
  }
  if (!(degrees_of_freedom > 0.0)) throw DataError("Student t cutoff needs positive degrees of freedom");
  return boost::math::quantile(
      boost::math::complement(boost::math::students_t_distribution<double>(degrees_of_freedom), tail));
}

std::vector<double> column_statistics_serial(const Eigen::MatrixXd& reference,
                                             const Eigen::MatrixXd& sample, Node skip,
                                             const TwoSampleStatistic& statistic) {
  check_shapes(reference, sample);
  const auto p = static_cast<int>(reference.cols());
  std::vector<double> out(static_cast<std::size_t>(p), kNaN);
  for (int j = 0; j < p; ++j) {
    if (j == skip) continue;
    out[static_cast<std::size_t>(j)] = apply_statistic(statistic, column(sample, j), column(reference, j));
  }
  return out;
}

std::vector<double> column_statistics(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& sample,
                                      Node skip, const TwoSampleStatistic& statistic) {
  check_shapes(reference, sample);
  const auto p = static_cast<int>(reference.cols());
  std::vector<double> out(static_cast<std::size_t>(p), kNaN);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < p; ++j) {
    if (j == skip) continue;
    try {
      out[static_cast<std::size_t>(j)] = apply_statistic(statistic, column(sample, j), column(reference, j));
    } catch (...) {
#pragma omp critical(causalrisk_column_statistics)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<double> observational_normal_scores(std::span<const double> reference,
                                                std::span<const double> values) {
  if (reference.empty()) throw DataError("normal scores need a nonempty reference sample");
  std::vector<double> sorted(reference.begin(), reference.end());
  std::sort(sorted.begin(), sorted.end());
  const double denominator = static_cast<double>(sorted.size()) + 1.0;
  const boost::math::normal_distribution<double> standard;
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    const auto upto = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
    const double rank = static_cast<double>(below) + (static_cast<double>(upto - below) + 1.0) / 2.0;
    out.push_back(boost::math::quantile(standard, rank / denominator));
  }
  return out;
}

namespace {

Eigen::MatrixXd normal_scores_matrix(const Eigen::MatrixXd& reference, const Eigen::MatrixXd& values) {
  Eigen::MatrixXd out(values.rows(), values.cols());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const auto scores = observational_normal_scores(column(reference, j), column(values, j));
    std::copy(scores.begin(), scores.end(), out.data() + j * out.rows());
  }
  return out;
}

}  // namespace

DescendantEstimate estimate_descendants(const MultiRegimeDataset& d, Node i,
                                        const DescendantOptions& options) {
  const int p = d.num_variables();
  if (p < 2) throw DataError("descendant estimation needs at least 2 variables");
  const Eigen::MatrixXd& observational = d.observational();
  const Eigen::MatrixXd& intervened = *d.intervention(i).data;
  if (!options.statistic && (observational.rows() < 2 || intervened.rows() < 2)) {
    throw DataError("descendant estimation needs at least 2 rows in blocks 0 and " +
                    std::to_string(regime_label(i)));
  }

  int tests = p - 1;
  if (options.scope == CorrectionScope::Global) tests *= static_cast<int>(d.interventions().size());
  const double df = static_cast<double>(std::min(observational.rows(), intervened.rows()) - 1);

  DescendantEstimate estimate;
  estimate.source = i;
  estimate.cutoff = bonferroni_cutoff(options.alpha, tests, options.distribution, df);
  if (options.center_on_observational) {
    const Eigen::MatrixXd reference = normal_scores_matrix(observational, observational);
    const Eigen::MatrixXd sample = normal_scores_matrix(observational, intervened);
    estimate.statistics = column_statistics(reference, sample, i, options.statistic);
  } else {
    estimate.statistics = column_statistics(observational, intervened, i, options.statistic);
  }
  for (Node j = 0; j < p; ++j) {
    if (j == i) continue;
    const double t = estimate.statistics[static_cast<std::size_t>(j)];
    if (std::abs(t) > estimate.cutoff) estimate.members.push_back(j);
    if (std::isinf(t) || (t == 0.0 && (observational.col(j).array() == observational(0, j)).all() &&
                          (intervened.col(j).array() == intervened(0, j)).all())) {
      estimate.degenerate.push_back(j);
    }
  }
  return estimate;
}

DescendantMap estimate_all_descendants(const MultiRegimeDataset& d, const DescendantOptions& options) {
  DescendantMap out;
  for (Node i : d.intervened_nodes()) out.emplace(i, estimate_descendants(d, i, options));
  return out;
}

DescendantEstimate oracle_descendant_estimate(const Dag& truth, Node i) {
  DescendantEstimate estimate;
  estimate.source = i;
  estimate.members = descendants(truth, i);
  estimate.statistics.assign(static_cast<std::size_t>(truth.size()), kNaN);
  estimate.cutoff = kNaN;
  return estimate;
}

DescendantMap oracle_descendant_map(const Dag& truth, const std::vector<Node>& iota) {
  DescendantMap out;
  for (Node i : iota) out.emplace(i, oracle_descendant_estimate(truth, i));
  return out;
}

nlohmann::json to_json(const DescendantEstimate& estimate) {
  nlohmann::json doc;
  doc["source"] = estimate.source + 1;
  auto& members = doc["members"] = nlohmann::json::array();
  for (Node j : estimate.members) members.push_back(j + 1);
  doc["cutoff"] = std::isfinite(estimate.cutoff) ? nlohmann::json(estimate.cutoff) : nlohmann::json(nullptr);
  auto& stats = doc["statistics"] = nlohmann::json::array();
  for (std::size_t j = 0; j < estimate.statistics.size(); ++j) {
    if (static_cast<Node>(j) == estimate.source) continue;
    const double t = estimate.statistics[j];
    nlohmann::json value = std::isfinite(t) ? nlohmann::json(t)
                           : std::isnan(t)  ? nlohmann::json(nullptr)
                                            : nlohmann::json(t > 0 ? "inf" : "-inf");
    stats.push_back({{"node", static_cast<int>(j) + 1}, {"statistic", std::move(value)}});
  }
  auto& degenerate = doc["degenerate"] = nlohmann::json::array();
  for (Node j : estimate.degenerate) degenerate.push_back(j + 1);
  return doc;
}

}  // namespace causalrisk
