#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "causalrisk/error.hpp"
#include "causalrisk/harness.hpp"
#include "causalrisk/report.hpp"
#include "support.hpp"

using namespace causalrisk;

namespace {

SettingAxes small_axes() {
  SettingAxes axes;
  axes.p = 8;
  axes.ens = 2.5;
  axes.p_iota = 0.5;
  axes.n_int = 30;
  return axes;
}

GridConfig small_grid() {
  GridConfig config;
  config.settings = 6;
  config.space.p = {6, 8};
  config.space.n_int = {20};
  config.space.ens = {1.5, 2.5};
  config.learners = {parse_learner_spec("greedy-bic"), parse_learner_spec("empty"), parse_learner_spec("acor")};
  config.pair = std::make_pair(std::string("greedy-bic"), std::string("empty"));
  return config;
}

std::string csv_of(const std::vector<SettingRecord>& records) {
  std::ostringstream out;
  write_results_csv(out, records);
  return out.str();
}

SettingRecord record(int p, double oh_a, double oh_b, double w_a, double w_b) {
  SettingRecord r;
  r.axes.p = p;
  r.learners.push_back({"a", true, "", oh_a, 0, 0, w_a});
  r.learners.push_back({"b", true, "", oh_b, 0, 0, w_b});
  return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("observational size") {
  CHECK(observational_size(10) == 100);
  CHECK(observational_size(100) == 100);
  CHECK(observational_size(1000) == 1000);
}

TEST_CASE("full intervention probability intervenes on every node") {
  Rng rng(1);
  SettingAxes axes = small_axes();
  axes.p_iota = 1.0;
  const Setting s = draw_setting(axes, rng);
  CHECK(s.iota.size() == 8);
  CHECK(s.n_obs == 100);
}

TEST_CASE("accepted settings pass both filters") {
  Rng rng(2);
  SettingAxes axes = small_axes();
  axes.p_iota = 0.2;
  axes.ens = 1.5;
  for (int k = 0; k < 100; ++k) {
    const Setting s = draw_setting(axes, rng);
    CHECK(s.iota.size() >= 2);
    int total = 0;
    for (Node i : s.iota) total += static_cast<int>(descendants(s.dag, i).size());
    CHECK(total == s.total_true_descendants);
    CHECK(total >= 3);
    CHECK(s.attempts >= 1);
  }
}

TEST_CASE("intervention count follows the conditioned binomial") {
  Rng rng(3);
  SettingAxes axes;
  axes.p = 25;
  axes.ens = 2.5;
  axes.p_iota = 0.1;
  SettingFilters filters;
  filters.min_total_descendants = 0;
  const int draws = 10000;
  std::vector<int> counts(26, 0);
  for (int k = 0; k < draws; ++k) ++counts[draw_setting(axes, rng, filters).iota.size()];
  std::vector<double> pmf(26);
  for (int k = 0; k <= 25; ++k) pmf[k] = std::exp(std::lgamma(26.0) - std::lgamma(k + 1.0) - std::lgamma(26.0 - k) + k * std::log(0.1) + (25 - k) * std::log(0.9));
  const double kept = 1.0 - pmf[0] - pmf[1];
  CHECK(counts[0] == 0);
  CHECK(counts[1] == 0);
  double chi2 = 0.0;
  int bins = 0;
  double tail_expected = 0.0, tail_observed = 0.0;
  for (int k = 2; k <= 25; ++k) {
    const double expected = draws * pmf[k] / kept;
    if (k >= 7) {
      tail_expected += expected;
      tail_observed += counts[k];
      continue;
    }
    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
    ++bins;
  }
  chi2 += (tail_observed - tail_expected) * (tail_observed - tail_expected) / tail_expected;
  ++bins;
  // 6 degrees of freedom; the 0.999 quantile is 22.46.
  CHECK(bins == 6);
  CHECK(chi2 < 22.46);
}

TEST_CASE("impossible filters exhaust the retry budget") {
  Rng rng(4);
  SettingAxes axes;
  axes.p = 2;
  axes.ens = 1.0;
  axes.p_iota = 1.0;
  SettingFilters filters;
  filters.max_retries = 20;
  CHECK_THROWS_AS(draw_setting(axes, rng, filters), RetryBudgetExhausted);
}

TEST_CASE("perfect learner has zero oracle and naive risk") {
  Rng rng(5);
  const Setting s = draw_setting(small_axes(), rng);
  RunOptions options;
  options.oracle_descendants = true;
  const LearnerList learners{std::make_shared<FixedGraphLearner>("perfect", s.dag.graph())};
  const auto r = run_setting(s, learners, options);
  REQUIRE(r.learners.size() == 1);
  CHECK(r.learners[0].ok);
  CHECK(r.learners[0].oracle_hat == 0.0);
  CHECK(r.learners[0].naive == 0.0);
  CHECK(r.learners[0].cv == 0.0);
  CHECK(r.learners[0].weighted == 0.0);
  CHECK(r.descendants.false_positives == 0);
  CHECK(r.descendants.false_negatives == 0);
  CHECK(r.descendants.true_positives == s.total_true_descendants);
}

TEST_CASE("each learner is fit once on all data and once per fold") {
  Rng rng(6);
  const Setting s = draw_setting(small_axes(), rng);
  auto a = std::make_shared<support::RecordingLearner>("a", MixedGraph(8));
  auto b = std::make_shared<support::RecordingLearner>("b", support::chain(8));
  run_setting(s, {a, b});
  const auto iota_size = s.iota.size();
  CHECK(a->seen().size() + b->seen().size() == 2 * (1 + iota_size));
  CHECK(a->seen().front() == s.iota);
}

TEST_CASE("learner failures are recorded, not thrown") {
  Rng rng(7);
  const Setting s = draw_setting(small_axes(), rng);
  const LearnerList learners{std::make_shared<support::ThrowingLearner>(),
                             std::make_shared<FixedGraphLearner>("empty-graph", MixedGraph(8))};
  const auto r = run_setting(s, learners);
  CHECK_FALSE(r.learners[0].ok);
  CHECK(r.learners[0].error.find("boom") != std::string::npos);
  CHECK(std::isnan(r.learners[0].weighted));
  CHECK(r.learners[1].ok);
}

TEST_CASE("run_setting is deterministic") {
  Rng r1(8), r2(8);
  const Setting s1 = draw_setting(small_axes(), r1), s2 = draw_setting(small_axes(), r2);
  const LearnerList learners = instantiate_learners({parse_learner_spec("greedy-bic"), parse_learner_spec("acor")}, s1);
  CHECK(csv_of({run_setting(s1, learners)}) == csv_of({run_setting(s2, learners)}));
}

TEST_CASE("acor picks up the setting's ENS") {
  Rng rng(9);
  const Setting s = draw_setting(small_axes(), rng);
  const auto learners = instantiate_learners({parse_learner_spec("acor")}, s);
  const auto r = run_setting(s, learners);
  CHECK(r.learners[0].ok);
}

TEST_CASE("oracle risk estimate") {
  Rng rng(10);
  const Setting s = draw_setting(small_axes(), rng);
  const FixedGraphLearner fixed("fixed", support::chain(8));
  const auto constant = estimate_oracle_risk(s, fixed, 5);
  CHECK(constant.standard_error == 0.0);
  CHECK(constant.effective_reps == 5);
  CHECK(constant.mean == oracle_hat(s.dag, support::chain(8)).value);

  std::shared_ptr<const Learner> greedy = make_learner(parse_learner_spec("greedy-bic"));
  const auto single = estimate_oracle_risk(s, *greedy, 1);
  CHECK(single.mean == run_setting(s, {greedy}).learners[0].oracle_hat);

  const support::ThrowingLearner bad;
  const auto failed = estimate_oracle_risk(s, bad, 3);
  CHECK(failed.failed_reps == 3);
  CHECK(std::isnan(failed.mean));
  CHECK_THROWS_AS(estimate_oracle_risk(s, fixed, 0), UsageError);
}

TEST_CASE("aggregation") {
  std::vector<SettingRecord> records{record(10, 0.5, 0.2, 0.6, 0.1), record(10, 0.1, 0.4, 0.1, 0.3),
                                     record(10, 0.3, 0.1, 0.5, 0.2), record(20, 0.2, 0.15, 0.9, 0.1),
                                     record(20, 0.6, 0.2, 0.1, 0.2)};
  const auto cells = aggregate_report(records, {"a", "b"}, 0.1, 3);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].key.p == 10);
  CHECK(cells[0].total_settings == 3);
  CHECK(cells[0].settings_count == 3);
  CHECK_FALSE(cells[0].empty);
  CHECK(cells[0].sign_agreement == 1.0);
  CHECK(cells[0].median_true_difference == doctest::Approx(0.2));
  CHECK(cells[1].total_settings == 2);
  CHECK(cells[1].settings_count == 1);
  CHECK(cells[1].empty);
  CHECK(cells[1].sign_agreement == 0.0);

  const auto loose = aggregate_report(records, {"a", "b"}, 0.0, 1);
  CHECK(loose[1].settings_count == 2);
  CHECK(loose[1].sign_agreement == 0.5);

  CHECK_THROWS_AS(aggregate_report(records, {"a", "c"}, 0.1, 3), UsageError);
  CHECK(aggregate_report({}, {"a", "b"}, 0.1, 3).empty());
  const auto self = aggregate_report(records, {"a", "a"}, 0.1, 1);
  for (const auto& cell : self) CHECK(cell.empty);
}

TEST_CASE("results csv round trip") {
  Rng rng(11);
  const Setting s = draw_setting(small_axes(), rng);
  const LearnerList learners{std::make_shared<support::ThrowingLearner>(),
                             std::make_shared<FixedGraphLearner>("quote \"me\", please", MixedGraph(8))};
  auto r = run_setting(s, learners);
  r.root_seed = 123;
  r.index = 4;
  const std::string text = csv_of({r, r});
  std::istringstream in(text);
  const auto back = read_results_csv(in);
  CHECK(back.size() == 1);
  CHECK(back[0].learners.size() == 4);
  CHECK(csv_of({back[0]}) != "");
  std::istringstream single(csv_of({r}));
  CHECK(csv_of(read_results_csv(single)) == csv_of({r}));

  std::istringstream bad("root_seed,setting\n1,2\n");
  CHECK_THROWS_AS(read_results_csv(bad), DataError);
}

TEST_CASE("grid determinism and parallel equivalence") {
  const GridConfig config = small_grid();
  const auto serial = run_grid_serial(config, 42);
  CHECK(serial.records.size() + serial.discarded.size() == 6);
  for (int jobs : {1, 2, 3}) CHECK(csv_of(run_grid(config, 42, jobs).records) == csv_of(serial.records));
  CHECK(csv_of(run_grid(config, 43, 2).records) != csv_of(serial.records));
  CHECK_THROWS_AS(run_grid(config, 42, 0), UsageError);
}

TEST_CASE("grid accounting") {
  GridConfig config = small_grid();
  config.settings = 24;
  config.space.p = {6};
  const auto result = run_grid(config, 7, 2);
  CHECK(result.discarded.empty());
  std::istringstream in(csv_of(result.records));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 24 * 3);
}

TEST_CASE("exhaustive grid enumerates cells times replicates") {
  GridConfig config = small_grid();
  config.mode = GridMode::Exhaustive;
  config.replicates = 2;
  config.space.p = {6, 8};
  config.space.ens = {1.5};
  config.space.link = {Link::Linear};
  config.space.noise = {Noise::Gaussian};
  config.space.p_iota = {0.5, 1.0};
  config.space.kind = {InterventionKind::Shift};
  config.space.n_int = {20};
  CHECK(exhaustive_axes(config.space).size() == 4);
  CHECK(grid_size(config) == 8);
  const Setting s = grid_setting(config, 1, 5);
  CHECK(s.axes.p == 8);
  CHECK(s.axes.p_iota == 0.5);
  const auto result = run_grid(config, 1, 2);
  CHECK(result.records.size() == 8);
  CHECK(result.records[7].axes.p_iota == 1.0);
}

TEST_CASE("discarded settings are reported") {
  GridConfig config = small_grid();
  config.space.p = {2};
  config.space.ens = {1.0};
  config.filters.max_retries = 5;
  const auto result = run_grid(config, 3, 1);
  CHECK(result.records.empty());
  CHECK(result.discarded.size() == 6);
}

TEST_CASE("grid config parsing") {
  const auto config = grid_config_from_json(nlohmann::json::parse(R"({
    "mode": "exhaustive", "replicates": 3,
    "space": {"p": [25], "link": ["linear", "sigmoidal"], "kind": ["do-shift"], "p_iota": [0.5]},
    "learners": ["greedy-bic", {"spec": "acor", "ens": 2.0}, "empty"],
    "pair": ["greedy-bic", "empty"], "alpha": 0.01, "correction": "global", "cutoff": "t",
    "center_on_observational": true, "tolerance": 0.2, "min_per_cell": 4, "max_retries": 50})"));
  CHECK(config.mode == GridMode::Exhaustive);
  CHECK(config.replicates == 3);
  CHECK(config.space.link.size() == 2);
  CHECK(config.space.kind == std::vector<InterventionKind>{InterventionKind::DoAndShift});
  CHECK(config.learners.size() == 3);
  CHECK(config.learners[1].ens_oracle == 2.0);
  CHECK(config.pair->second == "empty");
  CHECK(config.run.descend.alpha == 0.01);
  CHECK(config.run.descend.scope == CorrectionScope::Global);
  CHECK(config.run.descend.distribution == CutoffDistribution::StudentT);
  CHECK(config.run.descend.center_on_observational);
  CHECK(config.filters.max_retries == 50);
  const auto again = grid_config_from_json(to_json(config));
  CHECK(to_json(again) == to_json(config));
}

TEST_CASE("grid config diagnostics name the field") {
  auto message = [](const std::string& text) {
    try {
      grid_config_from_json(nlohmann::json::parse(text));
    } catch (const UsageError& ex) {
      return std::string(ex.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"space": {"p": [25, "x"]}})").find("space.p[1]") != std::string::npos);
  CHECK(message(R"({"space": {"link": ["cubic"]}})").find("space.link[0]") != std::string::npos);
  CHECK(message(R"({"learners": ["ges"]})").find("learners[0]") != std::string::npos);
  CHECK(message(R"({"settings": "many"})").find("'settings'") != std::string::npos);
  CHECK(message(R"({"bogus": 1})").find("bogus") != std::string::npos);
  CHECK(message(R"({"pair": ["a"]})").find("pair") != std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "causalrisk-bad-config.json";
  {
    std::ofstream out(path);
    out << "{\n  \"settings\": 4,\n  \"mode\" \"random\"\n}\n";
  }
  try {
    load_grid_config(path.string());
    FAIL("expected a syntax error");
  } catch (const UsageError& ex) {
    CHECK(std::string(ex.what()).find("line 3") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("report rendering") {
  const std::vector<SettingRecord> records{record(10, 0.5, 0.2, 0.6, 0.1), record(10, 0.6, 0.2, 0.6, 0.1),
                                           record(10, 0.7, 0.2, 0.6, 0.1), record(20, 0.5, 0.2, 0.6, 0.1)};
  const ReportParameters parameters{{"a", "b"}, 0.1, 3};
  const auto cells = aggregate_report(records, parameters.pair, 0.1, 3);
  const auto doc = cells_to_json(cells, parameters);
  CHECK(doc["cells"].size() == 2);
  CHECK(doc["cells"][0]["sign_agreement"] == 1.0);
  CHECK(doc["cells"][1]["sign_agreement"].is_null());
  const std::string svg = render_svg(cells, parameters);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(render_svg({}, parameters).find("no settings") != std::string::npos);
}

}  // TEST_SUITE
