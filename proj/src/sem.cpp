#include "causalrisk/sem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "causalrisk/error.hpp"

namespace causalrisk {

std::string_view to_string(Link link) {
  return link == Link::Linear ? "linear" : "sigmoidal";
}

std::string_view to_string(Noise noise) {
  return noise == Noise::Gaussian ? "gaussian" : "lognormal";
}

std::string_view to_string(InterventionKind kind) {
  return kind == InterventionKind::Shift ? "shift" : "do-shift";
}

Link parse_link(std::string_view text) {
  if (text == "linear") return Link::Linear;
  if (text == "sigmoidal") return Link::Sigmoidal;
  throw UsageError("unknown link '" + std::string(text) + "' (expected linear or sigmoidal)");
}

Noise parse_noise(std::string_view text) {
  if (text == "gaussian") return Noise::Gaussian;
  if (text == "lognormal") return Noise::Lognormal;
  throw UsageError("unknown noise '" + std::string(text) + "' (expected gaussian or lognormal)");
}

InterventionKind parse_intervention_kind(std::string_view text) {
  if (text == "shift") return InterventionKind::Shift;
  if (text == "do-shift" || text == "do-and-shift") return InterventionKind::DoAndShift;
  throw UsageError("unknown intervention kind '" + std::string(text) +
                   "' (expected shift or do-shift)");
}

double link_eval(Link link, double b, double x) {
  if (link == Link::Linear) return b * x;
  return b * (10.0 / (1.0 + std::exp(-0.65 * x)) - 5.0);
}

namespace {

const double kLognormalMean = std::exp(0.5);
const double kLognormalSd = std::sqrt((std::numbers::e - 1.0) * std::numbers::e);

class NoiseSampler {
 public:
  explicit NoiseSampler(Noise noise) : noise_(noise) {}

  double operator()(Rng& rng) {
    const double z = normal_(rng);
    if (noise_ == Noise::Gaussian) return z;
    return (std::exp(z) - kLognormalMean) / kLognormalSd;
  }

 private:
  Noise noise_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace

double standardized_noise(Noise noise, Rng& rng) {
  NoiseSampler sampler(noise);
  return sampler(rng);
}

Sem::Sem(Dag dag, Link link, Noise noise, std::vector<Equation> equations)
    : dag_(std::move(dag)), link_(link), noise_(noise), equations_(std::move(equations)) {
  const int p = dag_.size();
  if (static_cast<int>(equations_.size()) != p) throw DataError("SEM needs one equation per node");
  for (Node i = 0; i < p; ++i) {
    const Equation& eq = equations_[static_cast<std::size_t>(i)];
    const NodeSet pa = dag_.graph().parents(i);
    if (pa.size() != eq.parents.size()) {
      throw DataError("equation of node " + std::to_string(i + 1) + " does not match the DAG");
    }
    for (std::size_t k = 0; k < pa.size(); ++k) {
      if (eq.parents[k].first != pa[k]) {
        throw DataError("equation of node " + std::to_string(i + 1) + " does not match the DAG");
      }
      if (!std::isfinite(eq.parents[k].second) || eq.parents[k].second == 0.0) {
        throw DataError("edge weights must be finite and nonzero");
      }
    }
    if (!(eq.noise_sd > 0.0) || !(eq.signal_scale > 0.0) || !std::isfinite(eq.shift)) {
      throw DataError("equation of node " + std::to_string(i + 1) + " has invalid constants");
    }
  }
}

double Sem::weight(Node j, Node i) const {
  for (const auto& [parent, b] : equation(i).parents)
    if (parent == j) return b;
  return 0.0;
}

namespace {

struct Scale {
  double signal_scale = 1.0;
  double noise_sd = 1.0;
  bool degenerate = false;
};

constexpr double kDegenerateVariance = 1e-12;

Scale scale_for(double raw_signal_variance, double snr) {
  if (!(raw_signal_variance > kDegenerateVariance) || !std::isfinite(raw_signal_variance)) {
    return {1.0, 1.0, true};
  }
  return {std::sqrt((snr / (snr + 1.0)) / raw_signal_variance), std::sqrt(1.0 / (snr + 1.0)), false};
}

void scale_linear(const Dag& dag, std::vector<Equation>& eqs, double snr) {
  const int p = dag.size();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  std::vector<Node> processed;
  for (Node i : dag.order()) {
    Equation& eq = eqs[static_cast<std::size_t>(i)];
    if (eq.parents.empty()) {
      cov(i, i) = 1.0;
      processed.push_back(i);
      continue;
    }
    double var = 0.0;
    for (const auto& [a, wa] : eq.parents)
      for (const auto& [b, wb] : eq.parents) var += wa * wb * cov(a, b);
    const Scale s = scale_for(var, snr);
    eq.signal_scale = s.signal_scale;
    eq.noise_sd = s.noise_sd;
    eq.degenerate_scale = s.degenerate;
    for (Node k : processed) {
      double c = 0.0;
      for (const auto& [a, wa] : eq.parents) c += wa * cov(a, k);
      cov(i, k) = cov(k, i) = s.signal_scale * c;
    }
    cov(i, i) = s.signal_scale * s.signal_scale * var + s.noise_sd * s.noise_sd;
    processed.push_back(i);
  }
}

void scale_by_pilot(const Dag& dag, Link link, Noise noise, std::vector<Equation>& eqs,
                    const SemBuildOptions& options, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(options.pilot_samples);
  if (n < 2) throw DataError("pilot sample needs at least 2 rows");
  Rng pilot_rng(rng());
  NoiseSampler draw(noise);
  Eigen::MatrixXd pilot(n, dag.size());
  Eigen::VectorXd raw(n);
  for (Node i : dag.order()) {
    Equation& eq = eqs[static_cast<std::size_t>(i)];
    if (eq.parents.empty()) {
      for (Eigen::Index r = 0; r < n; ++r) pilot(r, i) = draw(pilot_rng);
      continue;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      double s = 0.0;
      for (const auto& [j, b] : eq.parents) s += link_eval(link, b, pilot(r, j));
      raw(r) = s;
    }
    const double mean = raw.mean();
    const double var = (raw.array() - mean).square().sum() / static_cast<double>(n - 1);
    const Scale s = scale_for(var, options.snr);
    eq.signal_scale = s.signal_scale;
    eq.noise_sd = s.noise_sd;
    eq.degenerate_scale = s.degenerate;
    for (Eigen::Index r = 0; r < n; ++r) pilot(r, i) = s.signal_scale * raw(r) + s.noise_sd * draw(pilot_rng);
  }
}

}  // namespace

Sem build_sem(const Dag& dag, Link link, Noise noise, const SemBuildOptions& options, Rng& rng) {
  if (!(options.snr > 0.0) || !std::isfinite(options.snr)) throw DataError("snr must be positive");
  const int p = dag.size();
  std::vector<Equation> eqs(static_cast<std::size_t>(p));
  std::uniform_real_distribution<double> magnitude(1.0, 3.0);
  std::bernoulli_distribution negative(0.5);
  for (const auto& [j, i] : dag.graph().directed_edges()) {
    const double m = magnitude(rng);
    eqs[static_cast<std::size_t>(i)].parents.emplace_back(j, negative(rng) ? -m : m);
  }
  if (link == Link::Linear) scale_linear(dag, eqs, options.snr);
  else scale_by_pilot(dag, link, noise, eqs, options, rng);
  return Sem(dag, link, noise, std::move(eqs));
}

Sem apply_intervention(const Sem& sem, const InterventionSpec& spec) {
  const int p = sem.size();
  if (spec.node < 0 || spec.node >= p) {
    throw DataError("intervention node " + std::to_string(spec.node + 1) + " out of range [1, " +
                    std::to_string(p) + "]");
  }
  if (!std::isfinite(spec.shift)) throw DataError("intervention shift must be finite");
  std::vector<Equation> eqs = sem.equations();
  Equation& eq = eqs[static_cast<std::size_t>(spec.node)];
  eq.shift = spec.shift;
  eq.intervention = spec.kind;
  if (spec.kind == InterventionKind::Shift) {
    return Sem(sem.dag(), sem.link(), sem.noise(), std::move(eqs));
  }
  eq.parents.clear();
  eq.signal_scale = 1.0;
  eq.noise_sd = 1.0;
  eq.degenerate_scale = false;
  return Sem(sem.dag().without_parents(spec.node), sem.link(), sem.noise(), std::move(eqs));
}

Eigen::MatrixXd sample(const Sem& sem, std::size_t n, Rng& rng) {
  if (n < 1) throw DataError("sample size must be at least 1");
  const int p = sem.size();
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x(rows, p);
  NoiseSampler draw(sem.noise());
  const Link link = sem.link();
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Node i : sem.dag().order()) {
      const Equation& eq = sem.equation(i);
      double signal = 0.0;
      if (!eq.parents.empty()) {
        for (const auto& [j, b] : eq.parents) signal += link_eval(link, b, x(r, j));
        signal *= eq.signal_scale;
      }
      x(r, i) = signal + eq.noise_sd * draw(rng) + eq.shift;
    }
  }
  return x;
}

Eigen::MatrixXd implied_covariance(const Sem& sem) {
  if (sem.link() != Link::Linear) throw DataError("implied covariance needs a linear SEM");
  const int p = sem.size();
  // X = B X + D eps  =>  Cov = (I - B)^-1 D D' (I - B)^-T
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd noise_var(p);
  for (Node i = 0; i < p; ++i) {
    const Equation& eq = sem.equation(i);
    for (const auto& [j, w] : eq.parents) b(i, j) = eq.signal_scale * w;
    noise_var(i) = eq.noise_sd * eq.noise_sd;
  }
  const Eigen::MatrixXd inv = (Eigen::MatrixXd::Identity(p, p) - b).inverse();
  return inv * noise_var.asDiagonal() * inv.transpose();
}

nlohmann::json to_json(const Sem& sem) {
  nlohmann::json doc;
  doc["p"] = sem.size();
  doc["link"] = std::string(to_string(sem.link()));
  doc["noise"] = std::string(to_string(sem.noise()));
  auto& order = doc["order"] = nlohmann::json::array();
  for (Node v : sem.dag().order()) order.push_back(v + 1);
  auto& equations = doc["equations"] = nlohmann::json::array();
  for (Node i = 0; i < sem.size(); ++i) {
    const Equation& eq = sem.equation(i);
    nlohmann::json e;
    e["node"] = i + 1;
    auto& parents = e["parents"] = nlohmann::json::array();
    for (const auto& [j, b] : eq.parents) parents.push_back({{"node", j + 1}, {"weight", b}});
    e["signal_scale"] = eq.signal_scale;
    e["noise_sd"] = eq.noise_sd;
    e["shift"] = eq.shift;
    e["degenerate_scale"] = eq.degenerate_scale;
    e["intervention"] = eq.intervention ? nlohmann::json(std::string(to_string(*eq.intervention)))
                                        : nlohmann::json(nullptr);
    equations.push_back(std::move(e));
  }
  return doc;
}

Sem sem_from_json(const nlohmann::json& doc) {
  try {
    const int p = doc.at("p").get<int>();
    MixedGraph g(p);
    std::vector<Equation> eqs(static_cast<std::size_t>(p));
    const auto& equations = doc.at("equations");
    if (static_cast<int>(equations.size()) != p) throw DataError("SEM JSON: equation count != p");
    for (const auto& e : equations) {
      const Node i = e.at("node").get<int>() - 1;
      if (i < 0 || i >= p) throw DataError("SEM JSON: equation node out of range");
      Equation& eq = eqs[static_cast<std::size_t>(i)];
      for (const auto& parent : e.at("parents")) {
        const Node j = parent.at("node").get<int>() - 1;
        g.add_directed(j, i);
        eq.parents.emplace_back(j, parent.at("weight").get<double>());
      }
      std::sort(eq.parents.begin(), eq.parents.end());
      eq.signal_scale = e.at("signal_scale").get<double>();
      eq.noise_sd = e.at("noise_sd").get<double>();
      eq.shift = e.at("shift").get<double>();
      eq.degenerate_scale = e.value("degenerate_scale", false);
      if (e.contains("intervention") && !e.at("intervention").is_null()) {
        eq.intervention = parse_intervention_kind(e.at("intervention").get<std::string>());
      }
    }
    std::vector<Node> order;
    for (const auto& v : doc.at("order")) order.push_back(v.get<int>() - 1);
    return Sem(Dag(std::move(g), std::move(order)), parse_link(doc.at("link").get<std::string>()),
               parse_noise(doc.at("noise").get<std::string>()), std::move(eqs));
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("SEM JSON: ") + ex.what());
  }
}

}  // namespace causalrisk
