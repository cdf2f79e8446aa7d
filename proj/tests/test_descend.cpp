#include <doctest.h>

#include <cmath>
#include <vector>

#include "causalrisk/descend.hpp"
#include "causalrisk/error.hpp"
#include "oracles.hpp"

using namespace causalrisk;

namespace {

// Chain 0 -> 1 -> ... -> p-1 with positive weights.
Sem positive_chain(int p, Rng& rng) {
  MixedGraph g(p);
  for (Node i = 0; i + 1 < p; ++i) g.add_directed(i, i + 1);
  const Dag dag = Dag::from_graph(g);
  const Sem drawn = build_sem(dag, Link::Linear, Noise::Gaussian, 5.0, rng);
  std::vector<Equation> eqs = drawn.equations();
  for (auto& eq : eqs)
    for (auto& parent : eq.parents) parent.second = std::abs(parent.second);
  return Sem(dag, Link::Linear, Noise::Gaussian, eqs);
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

}  // namespace

TEST_SUITE("descend") {

TEST_CASE("welch t worked example") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 4, 5, 6};
  CHECK(welch_t(x, y) == doctest::Approx(-2.1909).epsilon(1e-4));
  CHECK(welch_t(x, y) == doctest::Approx(oracle::welch(x, y)).epsilon(1e-14));
  CHECK(welch_t(y, x) == -welch_t(x, y));
  CHECK(welch_t(x, x) == 0.0);
}

TEST_CASE("welch t matches the direct formula on random samples") {
  Rng rng(1);
  std::normal_distribution<double> z(0.3, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(3 + trial % 7), y(2 + trial % 11);
    for (auto& v : x) v = z(rng);
    for (auto& v : y) v = z(rng) + 1.0;
    CHECK(welch_t(x, y) == doctest::Approx(oracle::welch(x, y)).epsilon(1e-12));
    CHECK(welch_t(y, x) == -welch_t(x, y));
  }
}

TEST_CASE("welch t on constant samples") {
  const std::vector<double> zeros{0, 0, 0, 0}, fives{5, 5, 5, 5};
  CHECK(std::isinf(welch_t(zeros, fives)));
  CHECK(welch_t(zeros, fives) < 0);
  CHECK(welch_t(fives, fives) == 0.0);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(welch_t(one, fives), DataError);
}

TEST_CASE("bonferroni cutoffs") {
  CHECK(bonferroni_cutoff(0.05, 1, CutoffDistribution::Normal) == doctest::Approx(1.959963985).epsilon(1e-9));
  for (int tests : {1, 4, 24, 199}) {
    const double c = bonferroni_cutoff(0.05, tests, CutoffDistribution::Normal);
    CHECK(std::erfc(c / std::sqrt(2.0)) == doctest::Approx(0.05 / tests).epsilon(1e-9));
  }
  CHECK(bonferroni_cutoff(0.05, 1, CutoffDistribution::StudentT, 10) == doctest::Approx(2.228138852).epsilon(1e-9));
  CHECK(bonferroni_cutoff(0.05, 4, CutoffDistribution::StudentT, 10) >
        bonferroni_cutoff(0.05, 4, CutoffDistribution::Normal));
  CHECK_THROWS_AS(bonferroni_cutoff(0.05, 4, CutoffDistribution::StudentT, 0), DataError);
}

TEST_CASE("chain descendants are detected") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_stream(seed, 0);
    const Sem sem = positive_chain(3, rng);
    const auto d = generate(sem, {0, 1}, InterventionKind::Shift, 5.0, 1000, 1000, rng);
    const auto est = estimate_descendants(d, 0);
    if (est.members == NodeSet{1, 2}) ++hits;
    CHECK(std::isnan(est.statistics[0]));
    CHECK(est.statistics[1] > 0);
  }
  CHECK(hits >= 19);
}

TEST_CASE("empty graph false positives stay near alpha") {
  Rng rng(31);
  const Sem sem = build_sem(Dag(MixedGraph(5), {0, 1, 2, 3, 4}), Link::Linear, Noise::Gaussian, 5.0, rng);
  int false_positive = 0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r) {
    const auto d = generate(sem, {0, 1}, InterventionKind::Shift, 5.0, 200, 200, rng);
    if (!estimate_descendants(d, 0).members.empty()) ++false_positive;
  }
  CHECK(static_cast<double>(false_positive) / reps <= 0.1);
}

TEST_CASE("correction scope and cutoff distribution") {
  Rng rng(4);
  const Sem sem = positive_chain(4, rng);
  const auto d = generate(sem, {0, 2}, InterventionKind::Shift, 5.0, 50, 100, rng);
  const auto per = estimate_descendants(d, 0);
  CHECK(per.cutoff == bonferroni_cutoff(0.05, 3, CutoffDistribution::Normal));
  DescendantOptions global;
  global.scope = CorrectionScope::Global;
  CHECK(estimate_descendants(d, 0, global).cutoff == bonferroni_cutoff(0.05, 6, CutoffDistribution::Normal));
  DescendantOptions t;
  t.distribution = CutoffDistribution::StudentT;
  CHECK(estimate_descendants(d, 0, t).cutoff == bonferroni_cutoff(0.05, 3, CutoffDistribution::StudentT, 49));
  CHECK_THROWS(estimate_descendants(d, 1));
}

TEST_CASE("members are exactly the columns beyond the cutoff") {
  Rng rng(5);
  const Sem sem = positive_chain(5, rng);
  const auto d = generate(sem, {1, 3}, InterventionKind::DoAndShift, 5.0, 30, 100, rng);
  for (const auto& [i, est] : estimate_all_descendants(d)) {
    NodeSet expected;
    for (Node j = 0; j < 5; ++j)
      if (j != i && std::abs(est.statistics[static_cast<std::size_t>(j)]) > est.cutoff) expected.push_back(j);
    CHECK(est.members == expected);
    CHECK(est.source == i);
  }
}

TEST_CASE("custom statistic is used") {
  Rng rng(6);
  const Sem sem = positive_chain(3, rng);
  const auto d = generate(sem, {0, 1}, InterventionKind::Shift, 5.0, 30, 100, rng);
  DescendantOptions options;
  options.statistic = [](std::span<const double>, std::span<const double>) { return 100.0; };
  CHECK(estimate_descendants(d, 2 - 1, options).members == NodeSet{0, 2});
}

TEST_CASE("observational normal scores") {
  const std::vector<double> reference{1, 2, 3};
  const std::vector<double> values{2, 0, 10, 1};
  const auto scores = observational_normal_scores(reference, values);
  CHECK(scores[0] == doctest::Approx(0.0));
  CHECK(scores[1] == doctest::Approx(-1.150349380).epsilon(1e-8));
  CHECK(scores[2] == doctest::Approx(1.150349380).epsilon(1e-8));
  CHECK(scores[3] == doctest::Approx(-0.674489750).epsilon(1e-8));
}

TEST_CASE("centering keeps real descendants and is invariant to monotone transforms") {
  Rng rng(7);
  const Sem sem = positive_chain(3, rng);
  const auto d = generate(sem, {0, 1}, InterventionKind::Shift, 5.0, 1000, 1000, rng);
  DescendantOptions centred;
  centred.center_on_observational = true;
  CHECK(estimate_descendants(d, 0, centred).members == NodeSet{1, 2});

  auto cube = [](const Eigen::MatrixXd& m) { return std::make_shared<const Eigen::MatrixXd>(m.array().cube().matrix()); };
  std::map<Node, InterventionBlock> blocks;
  for (const auto& [i, block] : d.interventions()) blocks[i] = {block.spec, cube(*block.data)};
  const MultiRegimeDataset transformed(cube(d.observational()), blocks);
  CHECK(estimate_descendants(transformed, 0, centred).statistics[1] ==
        doctest::Approx(estimate_descendants(d, 0, centred).statistics[1]).epsilon(1e-12));
}

TEST_CASE("parallel and serial column statistics agree exactly") {
  Rng rng(8);
  const Eigen::MatrixXd a = gaussian(300, 40, rng), b = gaussian(120, 40, rng);
  for (Node skip : {0, 17, 39}) {
    const auto parallel = column_statistics(a, b, skip);
    const auto serial = column_statistics_serial(a, b, skip);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t j = 0; j < serial.size(); ++j) {
      if (static_cast<Node>(j) == skip) {
        CHECK(std::isnan(parallel[j]));
        CHECK(std::isnan(serial[j]));
      } else {
        CHECK(parallel[j] == serial[j]);
      }
    }
  }
}

TEST_CASE("oracle descendant map") {
  MixedGraph g(4);
  g.add_directed(0, 1);
  g.add_directed(1, 2);
  const Dag dag = Dag::from_graph(g);
  const auto map = oracle_descendant_map(dag, {0, 3});
  CHECK(map.size() == 2);
  CHECK(map.at(0).members == NodeSet{1, 2});
  CHECK(map.at(3).members.empty());
  CHECK(std::isnan(map.at(0).cutoff));
}

TEST_CASE("json uses 1-based nodes") {
  MixedGraph g(3);
  g.add_directed(0, 2);
  const auto doc = to_json(oracle_descendant_estimate(Dag::from_graph(g), 0));
  CHECK(doc["source"] == 1);
  CHECK(doc["members"] == nlohmann::json::array({3}));
  CHECK(doc["cutoff"].is_null());
}

}  // TEST_SUITE
