#include "causalrisk/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <omp.h>

#include "causalrisk/dataset.hpp"

namespace causalrisk {

namespace {

template <typename T>
const T& pick(const std::vector<T>& axis, const char* name, Rng& rng) {
  if (axis.empty()) throw UsageError(std::string("setting space axis '") + name + "' is empty");
  std::uniform_int_distribution<std::size_t> index(0, axis.size() - 1);
  return axis[index(rng)];
}

}  // namespace

Setting draw_setting(const SettingAxes& axes, Rng& rng, const SettingFilters& filters) {
  if (!(axes.p_iota >= 0.0 && axes.p_iota <= 1.0)) throw UsageError("P_iota must lie in [0, 1]");
  if (axes.n_int < 1) throw UsageError("n_int must be at least 1");
  std::bernoulli_distribution intervened(axes.p_iota);
  for (int attempt = 1; attempt <= filters.max_retries; ++attempt) {
    Dag dag = random_er_dag(axes.p, axes.ens, rng);
    std::vector<Node> iota;
    for (Node i = 0; i < axes.p; ++i)
      if (intervened(rng)) iota.push_back(i);
    if (static_cast<int>(iota.size()) < filters.min_interventions) continue;
    int total = 0;
    for (Node i : iota) total += static_cast<int>(descendants(dag, i).size());
    if (total < filters.min_total_descendants) continue;

    Setting setting;
    setting.axes = axes;
    setting.n_obs = observational_size(axes.n_int);
    setting.sem = build_sem(dag, axes.link, axes.noise, SemBuildOptions{axes.snr, 50'000}, rng);
    setting.dag = std::move(dag);
    setting.iota = std::move(iota);
    setting.total_true_descendants = total;
    setting.attempts = attempt;
    setting.data_seed = rng();
    return setting;
  }
  throw RetryBudgetExhausted("no graph/intervention draw passed the filters within " +
                             std::to_string(filters.max_retries) + " attempts");
}

Setting sample_setting(const SettingSpace& space, Rng& rng, const SettingFilters& filters) {
  SettingAxes axes;
  axes.p = pick(space.p, "p", rng);
  axes.ens = pick(space.ens, "ens", rng);
  axes.link = pick(space.link, "link", rng);
  axes.noise = pick(space.noise, "noise", rng);
  axes.p_iota = pick(space.p_iota, "p_iota", rng);
  axes.kind = pick(space.kind, "kind", rng);
  axes.n_int = pick(space.n_int, "n_int", rng);
  axes.shift = space.shift;
  axes.snr = space.snr;
  return draw_setting(axes, rng, filters);
}

std::vector<SettingAxes> exhaustive_axes(const SettingSpace& space) {
  std::vector<SettingAxes> out;
  for (int p : space.p)
    for (double ens : space.ens)
      for (Link link : space.link)
        for (Noise noise : space.noise)
          for (double p_iota : space.p_iota)
            for (InterventionKind kind : space.kind)
              for (std::size_t n_int : space.n_int)
                out.push_back({p, ens, link, noise, p_iota, kind, n_int, space.shift, space.snr});
  return out;
}

const LearnerRecord* SettingRecord::find(const std::string& learner_id) const {
  for (const auto& record : learners)
    if (record.learner == learner_id) return &record;
  return nullptr;
}

LearnerList instantiate_learners(const std::vector<LearnerConfig>& configs, const Setting& setting) {
  LearnerList out;
  for (LearnerConfig config : configs) {
    if (config.kind == LearnerKind::ACor && !config.ens_oracle) config.ens_oracle = setting.axes.ens;
    out.push_back(make_learner(config));
  }
  return out;
}

namespace {

MultiRegimeDataset replicate_dataset(const Setting& setting, std::uint64_t replication) {
  Rng rng = make_stream(setting.data_seed, replication);
  return generate(setting.sem, setting.iota, setting.axes.kind, setting.axes.shift, setting.axes.n_int,
                  setting.n_obs, rng);
}

MixedGraph fit_checked(const Learner& learner, const MultiRegimeDataset& d) {
  MixedGraph h;
  try {
    h = learner.fit(d);
  } catch (const LearnerError&) {
    throw;
  } catch (const std::exception& ex) {
    throw LearnerError(LearnerFailure::Internal, learner.id(), ex.what());
  }
  if (h.size() != d.num_variables()) {
    throw LearnerError(LearnerFailure::DimensionMismatch, learner.id(),
                       "returned " + std::to_string(h.size()) + " nodes, expected " +
                           std::to_string(d.num_variables()));
  }
  return h;
}

}  // namespace

SettingRecord run_setting(const Setting& setting, const LearnerList& learners, const RunOptions& options) {
  const MultiRegimeDataset d = replicate_dataset(setting, options.replication);
  const DescendantMap est = options.oracle_descendants ? oracle_descendant_map(setting.dag, setting.iota)
                                                       : estimate_all_descendants(d, options.descend);
  SettingRecord record;
  record.axes = setting.axes;
  record.n_obs = setting.n_obs;
  record.iota_size = static_cast<int>(setting.iota.size());
  record.total_true_descendants = setting.total_true_descendants;
  for (Node i : setting.iota) {
    const NodeSet truth = descendants(setting.dag, i);
    const NodeSet& found = est.at(i).members;
    NodeSet common;
    std::set_intersection(truth.begin(), truth.end(), found.begin(), found.end(), std::back_inserter(common));
    record.descendants.true_positives += static_cast<int>(common.size());
    record.descendants.false_positives += static_cast<int>(found.size() - common.size());
    record.descendants.false_negatives += static_cast<int>(truth.size() - common.size());
  }

  const int p = setting.axes.p;
  for (const auto& learner : learners) {
    LearnerRecord lr;
    lr.learner = learner->id();
    try {
      const MixedGraph h = fit_checked(*learner, d);
      const RiskValue naive = naive_risk(d, h, est, lr.learner);
      const RiskValue cv = cv_risk(d, *learner, est);
      lr.oracle_hat = oracle_hat(setting.dag, h, lr.learner).value;
      lr.naive = naive.value;
      lr.cv = cv.value;
      lr.weighted = weighted_risk(naive, cv, p, record.iota_size).value;
    } catch (const std::exception& ex) {
      lr.ok = false;
      lr.error = ex.what();
      lr.oracle_hat = lr.naive = lr.cv = lr.weighted = std::numeric_limits<double>::quiet_NaN();
    }
    record.learners.push_back(std::move(lr));
  }
  return record;
}

OracleRiskEstimate estimate_oracle_risk(const Setting& setting, const Learner& learner, int reps) {
  if (reps < 1) throw UsageError("oracle risk estimation needs at least one replication");
  std::vector<double> values;
  OracleRiskEstimate estimate;
  for (int r = 0; r < reps; ++r) {
    try {
      const MultiRegimeDataset d = replicate_dataset(setting, static_cast<std::uint64_t>(r));
      values.push_back(oracle_hat(setting.dag, fit_checked(learner, d)).value);
    } catch (const LearnerError&) {
      ++estimate.failed_reps;
    }
  }
  estimate.effective_reps = static_cast<int>(values.size());
  if (values.empty()) {
    estimate.mean = estimate.standard_error = std::numeric_limits<double>::quiet_NaN();
    return estimate;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  estimate.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - estimate.mean) * (v - estimate.mean);
    estimate.standard_error = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                                        static_cast<double>(values.size()));
  }
  return estimate;
}

std::size_t grid_size(const GridConfig& config) {
  if (config.mode == GridMode::Random) return static_cast<std::size_t>(std::max(0, config.settings));
  return exhaustive_axes(config.space).size() * static_cast<std::size_t>(std::max(0, config.replicates));
}

Setting grid_setting(const GridConfig& config, std::uint64_t root_seed, std::uint64_t index) {
  Rng rng = make_stream(root_seed, index);
  if (config.mode == GridMode::Random) return sample_setting(config.space, rng, config.filters);
  const auto combos = exhaustive_axes(config.space);
  const auto replicates = static_cast<std::uint64_t>(config.replicates);
  return draw_setting(combos.at(index / replicates), rng, config.filters);
}

namespace {

struct Slot {
  std::optional<SettingRecord> record;
  std::string discard_reason;
};

Slot run_slot(const GridConfig& config, std::uint64_t root_seed, std::uint64_t index) {
  Slot slot;
  try {
    const Setting setting = grid_setting(config, root_seed, index);
    SettingRecord record = run_setting(setting, instantiate_learners(config.learners, setting), config.run);
    record.root_seed = root_seed;
    record.index = index;
    slot.record = std::move(record);
  } catch (const std::exception& ex) {
    slot.discard_reason = ex.what();
  }
  return slot;
}

GridResult collect(std::vector<Slot>& slots) {
  GridResult result;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k].record) result.records.push_back(std::move(*slots[k].record));
    else result.discarded.push_back({k, slots[k].discard_reason});
  }
  return result;
}

}  // namespace

GridResult run_grid_serial(const GridConfig& config, std::uint64_t root_seed) {
  std::vector<Slot> slots(grid_size(config));
  for (std::size_t k = 0; k < slots.size(); ++k) slots[k] = run_slot(config, root_seed, k);
  return collect(slots);
}

GridResult run_grid(const GridConfig& config, std::uint64_t root_seed, int jobs) {
  if (jobs < 1) throw UsageError("--jobs must be at least 1");
  const auto n = static_cast<long>(grid_size(config));
  std::vector<Slot> slots(static_cast<std::size_t>(n));
  // Kernels called inside a setting stay single-threaded; parallelism is across settings.
  const int nested = omp_get_max_active_levels();
  omp_set_max_active_levels(1);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (long k = 0; k < n; ++k) {
    slots[static_cast<std::size_t>(k)] = run_slot(config, root_seed, static_cast<std::uint64_t>(k));
  }
  omp_set_max_active_levels(nested);
  return collect(slots);
}

// ---------------------------------------------------------------------------------------------
// Results CSV

namespace {

const std::vector<std::string> kResultColumns = {
    "root_seed", "setting", "p", "ens", "link", "noise", "kind", "p_iota", "n_int", "n_obs",
    "iota_size", "true_descendants", "desc_tp", "desc_fp", "desc_fn", "learner", "status",
    "oracle_hat", "naive", "cv", "weighted", "error"};

std::string shortest(double value) {
  if (std::isnan(value)) return "";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

std::string quoted(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += "\"\"";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (in_quotes) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') { field += '"'; ++k; }
      else if (c == '"') in_quotes = false;
      else field += c;
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (in_quotes) throw DataError("results line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

template <typename T>
T parse_number(const std::string& text, const char* column, int line_no) {
  T value{};
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw DataError("results line " + std::to_string(line_no) + ": column " + column + " has '" + text + "'");
  }
  return value;
}

double parse_optional_real(const std::string& text, const char* column, int line_no) {
  if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
  return parse_number<double>(text, column, line_no);
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<SettingRecord>& records) {
  for (std::size_t c = 0; c < kResultColumns.size(); ++c) out << (c ? "," : "") << kResultColumns[c];
  out << '\n';
  for (const auto& r : records) {
    for (const auto& l : r.learners) {
      out << r.root_seed << ',' << r.index << ',' << r.axes.p << ',' << shortest(r.axes.ens) << ','
          << to_string(r.axes.link) << ',' << to_string(r.axes.noise) << ',' << to_string(r.axes.kind) << ','
          << shortest(r.axes.p_iota) << ',' << r.axes.n_int << ',' << r.n_obs << ',' << r.iota_size << ','
          << r.total_true_descendants << ',' << r.descendants.true_positives << ','
          << r.descendants.false_positives << ',' << r.descendants.false_negatives << ','
          << quoted(l.learner) << ',' << (l.ok ? "ok" : "error") << ',' << shortest(l.oracle_hat) << ','
          << shortest(l.naive) << ',' << shortest(l.cv) << ',' << shortest(l.weighted) << ','
          << quoted(l.error) << '\n';
    }
  }
}

std::vector<SettingRecord> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("results file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (parse_csv_line(line, 1) != kResultColumns) throw DataError("results header does not match the expected columns");

  std::vector<SettingRecord> records;
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> where;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = parse_csv_line(line, line_no);
    if (f.size() != kResultColumns.size()) {
      throw DataError("results line " + std::to_string(line_no) + ": expected " +
                      std::to_string(kResultColumns.size()) + " fields, found " + std::to_string(f.size()));
    }
    SettingRecord r;
    r.root_seed = parse_number<std::uint64_t>(f[0], "root_seed", line_no);
    r.index = parse_number<std::uint64_t>(f[1], "setting", line_no);
    r.axes.p = parse_number<int>(f[2], "p", line_no);
    r.axes.ens = parse_number<double>(f[3], "ens", line_no);
    try {
      r.axes.link = parse_link(f[4]);
      r.axes.noise = parse_noise(f[5]);
      r.axes.kind = parse_intervention_kind(f[6]);
    } catch (const UsageError& ex) {
      throw DataError("results line " + std::to_string(line_no) + ": " + ex.what());
    }
    r.axes.p_iota = parse_number<double>(f[7], "p_iota", line_no);
    r.axes.n_int = parse_number<std::size_t>(f[8], "n_int", line_no);
    r.n_obs = parse_number<std::size_t>(f[9], "n_obs", line_no);
    r.iota_size = parse_number<int>(f[10], "iota_size", line_no);
    r.total_true_descendants = parse_number<int>(f[11], "true_descendants", line_no);
    r.descendants = {parse_number<int>(f[12], "desc_tp", line_no), parse_number<int>(f[13], "desc_fp", line_no),
                     parse_number<int>(f[14], "desc_fn", line_no)};
    LearnerRecord l;
    l.learner = f[15];
    if (f[16] != "ok" && f[16] != "error") {
      throw DataError("results line " + std::to_string(line_no) + ": status must be ok or error");
    }
    l.ok = f[16] == "ok";
    l.oracle_hat = parse_optional_real(f[17], "oracle_hat", line_no);
    l.naive = parse_optional_real(f[18], "naive", line_no);
    l.cv = parse_optional_real(f[19], "cv", line_no);
    l.weighted = parse_optional_real(f[20], "weighted", line_no);
    l.error = f[21];

    const auto key = std::make_pair(r.root_seed, r.index);
    const auto it = where.find(key);
    if (it == where.end()) {
      r.learners.push_back(std::move(l));
      where.emplace(key, records.size());
      records.push_back(std::move(r));
    } else {
      records[it->second].learners.push_back(std::move(l));
    }
  }
  return records;
}

// ---------------------------------------------------------------------------------------------
// Aggregation

CellKey cell_key(const SettingAxes& axes) {
  return {axes.p, axes.n_int, axes.link, axes.noise, axes.kind, axes.p_iota};
}

std::vector<SignAgreementCell> aggregate_report(const std::vector<SettingRecord>& records,
                                                const std::pair<std::string, std::string>& pair,
                                                double tolerance, int min_per_cell) {
  if (!(tolerance >= 0.0)) throw UsageError("tolerance must be non-negative");
  if (min_per_cell < 1) throw UsageError("min-per-cell must be at least 1");
  if (!records.empty()) {
    for (const std::string* id : {&pair.first, &pair.second}) {
      const bool known = std::any_of(records.begin(), records.end(),
                                     [&](const SettingRecord& r) { return r.find(*id) != nullptr; });
      if (!known) throw UsageError("learner '" + *id + "' does not appear in the results");
    }
  }

  struct Accumulator {
    int total = 0;
    std::vector<double> differences;
    int agreeing = 0;
  };
  std::map<CellKey, Accumulator> cells;
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  for (const auto& r : records) {
    Accumulator& acc = cells[cell_key(r.axes)];
    const LearnerRecord* a = r.find(pair.first);
    const LearnerRecord* b = r.find(pair.second);
    if (!a || !b || !a->ok || !b->ok) continue;
    ++acc.total;
    const double truth = a->oracle_hat - b->oracle_hat;
    if (std::abs(truth) < tolerance) continue;
    acc.differences.push_back(truth);
    if (sign(a->weighted - b->weighted) == sign(truth)) ++acc.agreeing;
  }

  std::vector<SignAgreementCell> out;
  for (auto& [key, acc] : cells) {
    SignAgreementCell cell;
    cell.key = key;
    cell.total_settings = acc.total;
    cell.settings_count = static_cast<int>(acc.differences.size());
    cell.empty = cell.settings_count < min_per_cell;
    if (acc.differences.empty()) {
      cell.median_true_difference = cell.sign_agreement = std::numeric_limits<double>::quiet_NaN();
    } else {
      auto& v = acc.differences;
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size() / 2;
      cell.median_true_difference = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
      cell.sign_agreement = static_cast<double>(acc.agreeing) / static_cast<double>(v.size());
    }
    out.push_back(cell);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Grid configuration

namespace {

const std::set<std::string> kConfigKeys = {
    "mode", "settings", "replicates", "space", "learners", "pair", "alpha", "correction", "cutoff",
    "center_on_observational", "oracle_descendants", "tolerance", "min_per_cell", "max_retries",
    "min_interventions", "min_total_descendants", "timeout_secs"};
const std::set<std::string> kSpaceKeys = {"p", "ens", "link", "noise", "p_iota", "kind", "n_int", "shift", "snr"};
const std::set<std::string> kLearnerKeys = {"spec", "ens", "timeout_secs", "max_iters", "score_penalty", "max_parents"};

template <typename T>
T field(const nlohmann::json& node, const std::string& path) {
  try {
    return node.get<T>();
  } catch (const nlohmann::json::exception& ex) {
    throw UsageError("grid config field '" + path + "': " + ex.what());
  }
}

template <typename T, typename Parse>
std::vector<T> axis(const nlohmann::json& node, const std::string& path, Parse parse) {
  if (!node.is_array() || node.empty()) throw UsageError("grid config field '" + path + "' must be a nonempty array");
  std::vector<T> out;
  for (std::size_t k = 0; k < node.size(); ++k) {
    const std::string item = path + "[" + std::to_string(k) + "]";
    try {
      out.push_back(parse(node[k], item));
    } catch (const UsageError& ex) {
      const std::string what = ex.what();
      if (what.find("grid config field") == 0) throw;
      throw UsageError("grid config field '" + item + "': " + what);
    }
  }
  return out;
}

void reject_unknown(const nlohmann::json& node, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : node.items()) {
    if (!known.count(item.key())) {
      throw UsageError("grid config: unknown field '" + where + item.key() + "'");
    }
  }
}

LearnerConfig learner_from_json(const nlohmann::json& node, const std::string& path,
                                std::chrono::milliseconds default_timeout) {
  LearnerConfig config;
  if (node.is_string()) {
    config = parse_learner_spec(node.get<std::string>());
    config.timeout = default_timeout;
    return config;
  }
  if (!node.is_object() || !node.contains("spec")) {
    throw UsageError("grid config field '" + path + "' must be a learner name or an object with 'spec'");
  }
  reject_unknown(node, kLearnerKeys, path + ".");
  config = parse_learner_spec(field<std::string>(node.at("spec"), path + ".spec"));
  config.timeout = default_timeout;
  if (node.contains("ens")) config.ens_oracle = field<double>(node.at("ens"), path + ".ens");
  if (node.contains("timeout_secs")) {
    config.timeout = std::chrono::milliseconds(
        static_cast<long long>(1000.0 * field<double>(node.at("timeout_secs"), path + ".timeout_secs")));
  }
  if (node.contains("max_iters")) config.max_iters = field<int>(node.at("max_iters"), path + ".max_iters");
  if (node.contains("score_penalty")) config.score_penalty = field<double>(node.at("score_penalty"), path + ".score_penalty");
  if (node.contains("max_parents")) config.max_parents = field<int>(node.at("max_parents"), path + ".max_parents");
  return config;
}

}  // namespace

GridConfig grid_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw UsageError("grid config must be a JSON object");
  reject_unknown(doc, kConfigKeys, "");
  GridConfig config;
  if (doc.contains("mode")) {
    const auto mode = field<std::string>(doc.at("mode"), "mode");
    if (mode == "random") config.mode = GridMode::Random;
    else if (mode == "exhaustive") config.mode = GridMode::Exhaustive;
    else throw UsageError("grid config field 'mode' must be random or exhaustive");
  }
  if (doc.contains("settings")) config.settings = field<int>(doc.at("settings"), "settings");
  if (doc.contains("replicates")) config.replicates = field<int>(doc.at("replicates"), "replicates");
  if (config.settings < 0) throw UsageError("grid config field 'settings' must be non-negative");
  if (config.replicates < 1) throw UsageError("grid config field 'replicates' must be at least 1");

  if (doc.contains("space")) {
    const auto& s = doc.at("space");
    if (!s.is_object()) throw UsageError("grid config field 'space' must be an object");
    reject_unknown(s, kSpaceKeys, "space.");
    auto& sp = config.space;
    if (s.contains("p")) sp.p = axis<int>(s.at("p"), "space.p", [](const auto& v, const auto& f) { return field<int>(v, f); });
    if (s.contains("ens")) sp.ens = axis<double>(s.at("ens"), "space.ens", [](const auto& v, const auto& f) { return field<double>(v, f); });
    if (s.contains("link")) sp.link = axis<Link>(s.at("link"), "space.link", [](const auto& v, const auto& f) { return parse_link(field<std::string>(v, f)); });
    if (s.contains("noise")) sp.noise = axis<Noise>(s.at("noise"), "space.noise", [](const auto& v, const auto& f) { return parse_noise(field<std::string>(v, f)); });
    if (s.contains("p_iota")) sp.p_iota = axis<double>(s.at("p_iota"), "space.p_iota", [](const auto& v, const auto& f) { return field<double>(v, f); });
    if (s.contains("kind")) sp.kind = axis<InterventionKind>(s.at("kind"), "space.kind", [](const auto& v, const auto& f) { return parse_intervention_kind(field<std::string>(v, f)); });
    if (s.contains("n_int")) sp.n_int = axis<std::size_t>(s.at("n_int"), "space.n_int", [](const auto& v, const auto& f) { return field<std::size_t>(v, f); });
    if (s.contains("shift")) sp.shift = field<double>(s.at("shift"), "space.shift");
    if (s.contains("snr")) sp.snr = field<double>(s.at("snr"), "space.snr");
    for (int p : sp.p) if (p < 2) throw UsageError("grid config field 'space.p' entries must be at least 2");
    for (double v : sp.p_iota) if (!(v > 0.0 && v <= 1.0)) throw UsageError("grid config field 'space.p_iota' entries must lie in (0, 1]");
    if (!(sp.snr > 0.0)) throw UsageError("grid config field 'space.snr' must be positive");
  }

  std::chrono::milliseconds timeout = std::chrono::minutes(10);
  if (doc.contains("timeout_secs")) {
    timeout = std::chrono::milliseconds(static_cast<long long>(1000.0 * field<double>(doc.at("timeout_secs"), "timeout_secs")));
  }
  if (doc.contains("learners")) {
    const auto& list = doc.at("learners");
    if (!list.is_array()) throw UsageError("grid config field 'learners' must be an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string path = "learners[" + std::to_string(k) + "]";
      try {
        config.learners.push_back(learner_from_json(list[k], path, timeout));
      } catch (const UsageError& ex) {
        const std::string what = ex.what();
        if (what.find("grid config") == 0) throw;
        throw UsageError("grid config field '" + path + "': " + what);
      }
    }
  } else {
    config.learners = {parse_learner_spec("greedy-bic"), parse_learner_spec("empty")};
  }
  if (doc.contains("pair")) {
    const auto pair = field<std::vector<std::string>>(doc.at("pair"), "pair");
    if (pair.size() != 2) throw UsageError("grid config field 'pair' must list exactly two learners");
    config.pair = std::make_pair(pair[0], pair[1]);
  } else if (config.learners.size() >= 2) {
    config.pair = std::make_pair(learner_id(config.learners[0]), learner_id(config.learners[1]));
  }
  if (doc.contains("alpha")) config.run.descend.alpha = field<double>(doc.at("alpha"), "alpha");
  if (!(config.run.descend.alpha > 0.0 && config.run.descend.alpha < 1.0)) {
    throw UsageError("grid config field 'alpha' must lie in (0, 1)");
  }
  if (doc.contains("correction")) {
    const auto c = field<std::string>(doc.at("correction"), "correction");
    if (c == "per-intervention") config.run.descend.scope = CorrectionScope::PerIntervention;
    else if (c == "global") config.run.descend.scope = CorrectionScope::Global;
    else throw UsageError("grid config field 'correction' must be per-intervention or global");
  }
  if (doc.contains("cutoff")) {
    const auto c = field<std::string>(doc.at("cutoff"), "cutoff");
    if (c == "normal") config.run.descend.distribution = CutoffDistribution::Normal;
    else if (c == "t") config.run.descend.distribution = CutoffDistribution::StudentT;
    else throw UsageError("grid config field 'cutoff' must be normal or t");
  }
  if (doc.contains("center_on_observational")) {
    config.run.descend.center_on_observational = field<bool>(doc.at("center_on_observational"), "center_on_observational");
  }
  if (doc.contains("oracle_descendants")) {
    config.run.oracle_descendants = field<bool>(doc.at("oracle_descendants"), "oracle_descendants");
  }
  if (doc.contains("tolerance")) config.tolerance = field<double>(doc.at("tolerance"), "tolerance");
  if (doc.contains("min_per_cell")) config.min_per_cell = field<int>(doc.at("min_per_cell"), "min_per_cell");
  if (doc.contains("max_retries")) config.filters.max_retries = field<int>(doc.at("max_retries"), "max_retries");
  if (doc.contains("min_interventions")) config.filters.min_interventions = field<int>(doc.at("min_interventions"), "min_interventions");
  if (doc.contains("min_total_descendants")) config.filters.min_total_descendants = field<int>(doc.at("min_total_descendants"), "min_total_descendants");
  if (!(config.tolerance >= 0.0)) throw UsageError("grid config field 'tolerance' must be non-negative");
  if (config.min_per_cell < 1) throw UsageError("grid config field 'min_per_cell' must be at least 1");
  if (config.filters.max_retries < 1) throw UsageError("grid config field 'max_retries' must be at least 1");
  return config;
}

GridConfig load_grid_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open grid config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw UsageError(path + ": " + ex.what());
  }
  try {
    return grid_config_from_json(doc);
  } catch (const UsageError& ex) {
    throw UsageError(path + ": " + ex.what());
  }
}

nlohmann::json to_json(const GridConfig& config) {
  nlohmann::json doc;
  doc["mode"] = config.mode == GridMode::Random ? "random" : "exhaustive";
  doc["settings"] = config.settings;
  doc["replicates"] = config.replicates;
  auto& s = doc["space"];
  s["p"] = config.space.p;
  s["ens"] = config.space.ens;
  s["link"] = nlohmann::json::array();
  for (Link v : config.space.link) s["link"].push_back(std::string(to_string(v)));
  s["noise"] = nlohmann::json::array();
  for (Noise v : config.space.noise) s["noise"].push_back(std::string(to_string(v)));
  s["p_iota"] = config.space.p_iota;
  s["kind"] = nlohmann::json::array();
  for (InterventionKind v : config.space.kind) s["kind"].push_back(std::string(to_string(v)));
  s["n_int"] = config.space.n_int;
  s["shift"] = config.space.shift;
  s["snr"] = config.space.snr;
  auto& learners = doc["learners"] = nlohmann::json::array();
  for (const auto& l : config.learners) {
    nlohmann::json entry{{"spec", learner_id(l)}};
    if (l.ens_oracle) entry["ens"] = *l.ens_oracle;
    if (l.kind == LearnerKind::External) entry["timeout_secs"] = static_cast<double>(l.timeout.count()) / 1000.0;
    if (l.kind == LearnerKind::GreedyBic) {
      entry["max_iters"] = l.max_iters;
      entry["score_penalty"] = l.score_penalty;
      entry["max_parents"] = l.max_parents;
    }
    learners.push_back(std::move(entry));
  }
  if (config.pair) doc["pair"] = {config.pair->first, config.pair->second};
  doc["alpha"] = config.run.descend.alpha;
  doc["correction"] = config.run.descend.scope == CorrectionScope::Global ? "global" : "per-intervention";
  doc["cutoff"] = config.run.descend.distribution == CutoffDistribution::Normal ? "normal" : "t";
  doc["center_on_observational"] = config.run.descend.center_on_observational;
  doc["oracle_descendants"] = config.run.oracle_descendants;
  doc["tolerance"] = config.tolerance;
  doc["min_per_cell"] = config.min_per_cell;
  doc["max_retries"] = config.filters.max_retries;
  doc["min_interventions"] = config.filters.min_interventions;
  doc["min_total_descendants"] = config.filters.min_total_descendants;
  return doc;
}

}  // namespace causalrisk
