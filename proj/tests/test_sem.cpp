#include <doctest.h>

#include <cmath>

#include "causalrisk/error.hpp"
#include "causalrisk/sem.hpp"

using namespace causalrisk;

namespace {

Dag chain_dag(int p) {
  MixedGraph g(p);
  for (Node i = 0; i + 1 < p; ++i) g.add_directed(i, i + 1);
  return Dag::from_graph(g);
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& x) { return x.colwise().mean().transpose(); }

Eigen::VectorXd column_variances(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
  return (centred.array().square().colwise().sum() / static_cast<double>(x.rows() - 1)).transpose();
}

double skewness(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  const Eigen::ArrayXd c = v.array() - mean;
  const double var = c.square().mean();
  return c.cube().mean() / std::pow(var, 1.5);
}

}  // namespace

TEST_SUITE("sem") {

TEST_CASE("link functions") {
  CHECK(link_eval(Link::Linear, 2.0, 1.5) == 3.0);
  CHECK(link_eval(Link::Sigmoidal, 1.0, 0.0) == doctest::Approx(0.0));
  CHECK(link_eval(Link::Sigmoidal, 1.0, 1e6) == doctest::Approx(5.0));
  CHECK(link_eval(Link::Sigmoidal, 1.0, -1e6) == doctest::Approx(-5.0));
  CHECK(link_eval(Link::Sigmoidal, -2.0, 1.0) == doctest::Approx(-2.0 * (10.0 / (1.0 + std::exp(-0.65)) - 5.0)));
}

TEST_CASE("names round trip") {
  for (Link v : {Link::Linear, Link::Sigmoidal}) CHECK(parse_link(to_string(v)) == v);
  for (Noise v : {Noise::Gaussian, Noise::Lognormal}) CHECK(parse_noise(to_string(v)) == v);
  for (InterventionKind v : {InterventionKind::Shift, InterventionKind::DoAndShift})
    CHECK(parse_intervention_kind(to_string(v)) == v);
  CHECK(parse_intervention_kind("do-and-shift") == InterventionKind::DoAndShift);
  CHECK_THROWS_AS(parse_link("cubic"), UsageError);
  CHECK_THROWS_AS(parse_noise("uniform"), UsageError);
  CHECK_THROWS_AS(parse_intervention_kind("do"), UsageError);
}

TEST_CASE("empty graph SEM draws standardized noise") {
  for (Noise noise : {Noise::Gaussian, Noise::Lognormal}) {
    Rng rng(42);
    const Dag dag(MixedGraph(3), {0, 1, 2});
    const Sem sem = build_sem(dag, Link::Linear, noise, 5.0, rng);
    for (Node i = 0; i < 3; ++i) {
      CHECK(sem.equation(i).parents.empty());
      CHECK(sem.equation(i).noise_sd == 1.0);
    }
    const Eigen::MatrixXd x = sample(sem, 100'000, rng);
    const Eigen::VectorXd mean = column_means(x), var = column_variances(x);
    for (Node i = 0; i < 3; ++i) {
      CHECK(std::abs(mean(i)) < 0.02);
      CHECK(std::abs(var(i) - 1.0) < 0.05);
      if (noise == Noise::Lognormal) CHECK(skewness(x.col(i)) > 1.0);
      else CHECK(std::abs(skewness(x.col(i))) < 0.1);
    }
  }
}

TEST_CASE("weights lie in [1, 3] in absolute value with both signs") {
  Rng rng(3);
  int positive = 0, negative = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Dag dag = random_er_dag(15, 2.5, rng);
    const Sem sem = build_sem(dag, Link::Linear, Noise::Gaussian, 5.0, rng);
    for (const auto& [j, i] : dag.graph().directed_edges()) {
      const double b = sem.weight(j, i);
      CHECK(std::abs(b) >= 1.0);
      CHECK(std::abs(b) <= 3.0);
      (b > 0 ? positive : negative)++;
    }
    CHECK(sem.weight(0, 0) == 0.0);
  }
  CHECK(positive > 0);
  CHECK(negative > 0);
}

TEST_CASE("linear scaling is exact: unit variance and noise variance 1/6") {
  Rng rng(17);
  for (Noise noise : {Noise::Gaussian, Noise::Lognormal}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Dag dag = random_er_dag(25, 2.5, rng);
      const Sem sem = build_sem(dag, Link::Linear, noise, 5.0, rng);
      const Eigen::MatrixXd cov = implied_covariance(sem);
      for (Node i = 0; i < 25; ++i) {
        CHECK(cov(i, i) == doctest::Approx(1.0).epsilon(1e-9));
        if (sem.equation(i).parents.empty()) {
          CHECK(sem.equation(i).noise_sd == 1.0);
        } else {
          CHECK(sem.equation(i).noise_sd * sem.equation(i).noise_sd == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("sigmoidal scaling gives unit variance empirically") {
  Rng rng(5);
  const Dag dag = random_er_dag(10, 2.5, rng);
  for (Noise noise : {Noise::Gaussian, Noise::Lognormal}) {
    const Sem sem = build_sem(dag, Link::Sigmoidal, noise, 5.0, rng);
    const Eigen::VectorXd var = column_variances(sample(sem, 100'000, rng));
    for (Node i = 0; i < 10; ++i) {
      CHECK(var(i) > 0.9);
      CHECK(var(i) < 1.1);
    }
  }
}

TEST_CASE("implied covariance rejects sigmoidal links") {
  Rng rng(1);
  const Sem sem = build_sem(chain_dag(3), Link::Sigmoidal, Noise::Gaussian, 5.0, rng);
  CHECK_THROWS_AS(implied_covariance(sem), DataError);
}

TEST_CASE("do-and-shift fixes mean and variance of the target") {
  Rng rng(8);
  const Sem sem = build_sem(chain_dag(3), Link::Linear, Noise::Gaussian, 5.0, rng);
  const Sem cut = apply_intervention(sem, {1, InterventionKind::DoAndShift, 5.0});
  CHECK(cut.equation(1).parents.empty());
  CHECK(cut.equation(1).intervention == InterventionKind::DoAndShift);
  CHECK(cut.equation(2) == sem.equation(2));
  const Eigen::MatrixXd x = sample(cut, 100'000, rng);
  CHECK(std::abs(x.col(1).mean() - 5.0) < 0.05);
  CHECK(std::abs(column_variances(x)(1) - 1.0) < 0.05);
}

TEST_CASE("zero shift on a source leaves samples unchanged") {
  Rng rng(2);
  const Sem sem = build_sem(chain_dag(3), Link::Sigmoidal, Noise::Lognormal, 5.0, rng);
  const Sem same = apply_intervention(sem, {0, InterventionKind::Shift, 0.0});
  Rng a(99), b(99);
  CHECK(sample(sem, 500, a) == sample(same, 500, b));
}

TEST_CASE("shift propagates linearly to a child") {
  Rng rng(4);
  const Sem sem = build_sem(chain_dag(2), Link::Linear, Noise::Gaussian, 5.0, rng);
  const Sem shifted = apply_intervention(sem, {0, InterventionKind::Shift, 5.0});
  const double expected = sem.equation(1).signal_scale * sem.weight(0, 1) * 5.0;
  Rng a(10), b(10);
  const double delta = sample(shifted, 200'000, a).col(1).mean() - sample(sem, 200'000, b).col(1).mean();
  CHECK(delta == doctest::Approx(expected).epsilon(1e-9));
  Rng c(11);
  CHECK(std::abs(sample(shifted, 200'000, c).col(1).mean() - expected) < 0.02);
}

TEST_CASE("sampling is deterministic") {
  Rng rng(6);
  const Sem sem = build_sem(random_er_dag(8, 2.5, rng), Link::Sigmoidal, Noise::Lognormal, 5.0, rng);
  Rng a(1), b(1);
  CHECK(sample(sem, 100, a) == sample(sem, 100, b));
}

TEST_CASE("build_sem is deterministic") {
  Rng r1(21), r2(21);
  const Dag dag = chain_dag(4);
  CHECK(build_sem(dag, Link::Sigmoidal, Noise::Gaussian, 5.0, r1) ==
        build_sem(dag, Link::Sigmoidal, Noise::Gaussian, 5.0, r2));
}

TEST_CASE("json round trip") {
  Rng rng(12);
  const Sem sem = build_sem(random_er_dag(7, 2.5, rng), Link::Sigmoidal, Noise::Lognormal, 5.0, rng);
  CHECK(sem_from_json(to_json(sem)) == sem);
  const Sem cut = apply_intervention(sem, {3, InterventionKind::DoAndShift, 5.0});
  CHECK(sem_from_json(nlohmann::json::parse(to_json(cut).dump())) == cut);
}

TEST_CASE("equations must match the graph") {
  const Dag dag = chain_dag(2);
  std::vector<Equation> eqs(2);
  CHECK_THROWS_AS(Sem(dag, Link::Linear, Noise::Gaussian, eqs), DataError);
  eqs[1].parents = {{0, 1.5}};
  CHECK_NOTHROW(Sem(dag, Link::Linear, Noise::Gaussian, eqs));
}

}  // TEST_SUITE
