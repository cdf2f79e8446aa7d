#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "causalrisk/descend.hpp"
#include "causalrisk/error.hpp"
#include "causalrisk/learners.hpp"
#include "causalrisk/risk.hpp"
#include "causalrisk/sem.hpp"

namespace causalrisk {

// Axes of the simulation grid. Defaults are the full published grid.
struct SettingSpace {
  std::vector<int> p = {25, 50, 100, 200};
  std::vector<double> ens = {1.5, 2.5};
  std::vector<Link> link = {Link::Linear, Link::Sigmoidal};
  std::vector<Noise> noise = {Noise::Gaussian, Noise::Lognormal};
  std::vector<double> p_iota = {0.1, 0.2, 0.5, 1.0};
  std::vector<InterventionKind> kind = {InterventionKind::Shift, InterventionKind::DoAndShift};
  std::vector<std::size_t> n_int = {10, 100, 1000};
  double shift = 5.0;
  double snr = 5.0;
};

// One point of the space.
struct SettingAxes {
  int p = 25;
  double ens = 1.5;
  Link link = Link::Linear;
  Noise noise = Noise::Gaussian;
  double p_iota = 0.5;
  InterventionKind kind = InterventionKind::Shift;
  std::size_t n_int = 100;
  double shift = 5.0;
  double snr = 5.0;
};

inline std::size_t observational_size(std::size_t n_int) { return n_int > 100 ? n_int : 100; }

struct Setting {
  SettingAxes axes;
  std::size_t n_obs = 100;
  Dag dag;
  Sem sem;
  std::vector<Node> iota;
  int total_true_descendants = 0;
  // Graph/iota draws needed to pass the filters.
  int attempts = 0;
  // Root of the dataset streams; replication r uses make_stream(data_seed, r).
  std::uint64_t data_seed = 0;
};

struct SettingFilters {
  int min_interventions = 2;
  int min_total_descendants = 3;
  int max_retries = 1000;
};

class RetryBudgetExhausted : public Error {
 public:
  using Error::Error;
};

// Draws every axis uniformly, then redraws the graph and iota until |iota| >= 2 and the
// intervened nodes have at least 3 true descendants in total.
Setting sample_setting(const SettingSpace& space, Rng& rng, const SettingFilters& filters = {});
// Same with the axes fixed.
Setting draw_setting(const SettingAxes& axes, Rng& rng, const SettingFilters& filters = {});

std::vector<SettingAxes> exhaustive_axes(const SettingSpace& space);

struct RunOptions {
  DescendantOptions descend;
  // Feed the true descendant sets instead of testing.
  bool oracle_descendants = false;
  // Dataset replication r is drawn from make_stream(data_seed, r).
  std::uint64_t replication = 0;
};

struct LearnerRecord {
  std::string learner;
  bool ok = true;
  std::string error;
  double oracle_hat = 0.0;
  double naive = 0.0;
  double cv = 0.0;
  double weighted = 0.0;
};

struct DescendantDiagnostics {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
};

struct SettingRecord {
  std::uint64_t root_seed = 0;
  std::uint64_t index = 0;
  SettingAxes axes;
  std::size_t n_obs = 0;
  int iota_size = 0;
  int total_true_descendants = 0;
  DescendantDiagnostics descendants;
  std::vector<LearnerRecord> learners;

  const LearnerRecord* find(const std::string& learner_id) const;
};

using LearnerList = std::vector<std::shared_ptr<const Learner>>;

// Builds learners for a setting; ACor without an explicit ENS gets the setting's.
LearnerList instantiate_learners(const std::vector<LearnerConfig>& configs, const Setting& setting);

// Generates the setting's dataset (options.replication), fits every learner on all regimes and on each
// leave-one-intervention-out fold. Learner failures are recorded, not thrown.
SettingRecord run_setting(const Setting& setting, const LearnerList& learners,
                          const RunOptions& options = {});

struct OracleRiskEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int effective_reps = 0;
  int failed_reps = 0;
};

// Monte Carlo mean of oracle_hat over `reps` fresh datasets (replications 0..reps-1).
OracleRiskEstimate estimate_oracle_risk(const Setting& setting, const Learner& learner, int reps);

enum class GridMode { Random, Exhaustive };

struct GridConfig {
  GridMode mode = GridMode::Random;
  int settings = 24;    // random mode
  int replicates = 1;   // exhaustive mode
  SettingSpace space;
  std::vector<LearnerConfig> learners;
  std::optional<std::pair<std::string, std::string>> pair;
  RunOptions run;
  SettingFilters filters;
  double tolerance = 0.1;
  int min_per_cell = 3;
};

// Throws UsageError naming the offending field.
GridConfig grid_config_from_json(const nlohmann::json& doc);
// Throws UsageError with line/column on syntax errors.
GridConfig load_grid_config(const std::string& path);
nlohmann::json to_json(const GridConfig& config);

struct DiscardedSetting {
  std::uint64_t index = 0;
  std::string reason;
};

struct GridResult {
  std::vector<SettingRecord> records;
  std::vector<DiscardedSetting> discarded;
};

std::size_t grid_size(const GridConfig& config);
// Setting `index` of the grid, derived only from (root_seed, index).
Setting grid_setting(const GridConfig& config, std::uint64_t root_seed, std::uint64_t index);

// OpenMP worker pool over settings; results equal run_grid_serial for any jobs.
GridResult run_grid(const GridConfig& config, std::uint64_t root_seed, int jobs);
GridResult run_grid_serial(const GridConfig& config, std::uint64_t root_seed);

// One row per setting x learner.
void write_results_csv(std::ostream& out, const std::vector<SettingRecord>& records);
std::vector<SettingRecord> read_results_csv(std::istream& in);

struct CellKey {
  int p = 0;
  std::size_t n_int = 0;
  Link link = Link::Linear;
  Noise noise = Noise::Gaussian;
  InterventionKind kind = InterventionKind::Shift;
  double p_iota = 0.0;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

CellKey cell_key(const SettingAxes& axes);

struct SignAgreementCell {
  CellKey key;
  int total_settings = 0;   // settings where both learners succeeded
  int settings_count = 0;   // of those, |true difference| >= tolerance
  double median_true_difference = 0.0;
  double sign_agreement = 0.0;
  bool empty = true;        // settings_count < min_per_cell
};

// Groups records by cell, keeps |oracle_hat(first) - oracle_hat(second)| >= tolerance, and
// reports the median true difference and the share of kept records whose weighted difference
// has the same sign. Throws UsageError for learner ids absent from every record.
std::vector<SignAgreementCell> aggregate_report(const std::vector<SettingRecord>& records,
                                                const std::pair<std::string, std::string>& pair,
                                                double tolerance, int min_per_cell);

}  // namespace causalrisk
