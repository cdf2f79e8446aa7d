#include "causalrisk/learners.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>

#include "causalrisk/error.hpp"
#include "causalrisk/subprocess.hpp"

namespace causalrisk {

LearnerConfig parse_learner_spec(std::string_view spec) {
  LearnerConfig config;
  if (spec == "empty") {
    config.kind = LearnerKind::Empty;
  } else if (spec == "acor") {
    config.kind = LearnerKind::ACor;
  } else if (spec == "greedy-bic") {
    config.kind = LearnerKind::GreedyBic;
  } else if (spec.starts_with("external:")) {
    config.kind = LearnerKind::External;
    std::istringstream words{std::string(spec.substr(9))};
    std::string word;
    while (words >> word) config.command.push_back(word);
    if (config.command.empty()) throw UsageError("external learner needs a command: external:<path>");
  } else {
    throw UsageError("unknown learner '" + std::string(spec) +
                     "' (expected empty, acor, greedy-bic or external:<path>)");
  }
  return config;
}

std::string learner_id(const LearnerConfig& config) {
  switch (config.kind) {
    case LearnerKind::Empty: return "empty";
    case LearnerKind::ACor: return "acor";
    case LearnerKind::GreedyBic: return "greedy-bic";
    case LearnerKind::External: {
      std::string id = "external:";
      for (std::size_t k = 0; k < config.command.size(); ++k) id += (k ? " " : "") + config.command[k];
      return id;
    }
  }
  return "unknown";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Centred columns scaled to unit norm; constant columns become NaN.
Eigen::MatrixXd unit_columns(const Eigen::MatrixXd& data) {
  Eigen::MatrixXd z = data.rowwise() - data.colwise().mean();
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    double ss = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) ss += z(r, j) * z(r, j);
    if (ss > 0.0) z.col(j) /= std::sqrt(ss);
    else z.col(j).setConstant(kNaN);
  }
  return z;
}

double column_dot(const Eigen::MatrixXd& z, Eigen::Index a, Eigen::Index b) {
  double s = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) s += z(r, a) * z(r, b);
  return s;
}

void check_correlation_input(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw DataError("correlation needs at least 2 rows");
}

}  // namespace

Eigen::MatrixXd correlation_matrix_serial(const Eigen::MatrixXd& data) {
  check_correlation_input(data);
  const Eigen::MatrixXd z = unit_columns(data);
  const Eigen::Index p = data.cols();
  Eigen::MatrixXd corr(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) {
      const double c = std::isnan(z(0, a)) || std::isnan(z(0, b)) ? kNaN : column_dot(z, a, b);
      corr(a, b) = corr(b, a) = c;
    }
  }
  return corr;
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& data) {
  check_correlation_input(data);
  const Eigen::MatrixXd z = unit_columns(data);
  const auto p = static_cast<long>(data.cols());
  Eigen::MatrixXd corr(p, p);
#pragma omp parallel for schedule(dynamic)
  for (long a = 0; a < p; ++a) {
    for (long b = a; b < p; ++b) {
      const double c = std::isnan(z(0, a)) || std::isnan(z(0, b)) ? kNaN : column_dot(z, a, b);
      corr(a, b) = c;
      corr(b, a) = c;
    }
  }
  return corr;
}

namespace {

struct RankedPair {
  double strength;
  Node a;
  Node b;
};

void check_correlation_learner_input(const MultiRegimeDataset& d) {
  if (d.num_variables() < 2) throw DataError("correlation learners need at least 2 variables");
  if (d.observational().rows() < 3) throw DataError("correlation learners need at least 3 observational rows");
}

// Pairs with defined correlation, strongest first, ties lexicographic in (a, b).
std::vector<RankedPair> ranked_pairs(const Eigen::MatrixXd& observational) {
  const Eigen::MatrixXd corr = correlation_matrix(observational);
  std::vector<RankedPair> pairs;
  const auto p = static_cast<Node>(corr.cols());
  for (Node a = 0; a < p; ++a)
    for (Node b = a + 1; b < p; ++b)
      if (!std::isnan(corr(a, b))) pairs.push_back({std::abs(corr(a, b)), a, b});
  if (pairs.empty()) throw DataError("every variable pair has undefined correlation");
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const RankedPair& x, const RankedPair& y) { return x.strength > y.strength; });
  return pairs;
}

}  // namespace

MixedGraph fit_empty(const MultiRegimeDataset& d) {
  check_correlation_learner_input(d);
  const auto pairs = ranked_pairs(d.observational());
  MixedGraph g(d.num_variables());
  g.add_undirected(pairs.front().a, pairs.front().b);
  return g;
}

MixedGraph fit_acor(const MultiRegimeDataset& d, double ens_oracle) {
  check_correlation_learner_input(d);
  if (!(ens_oracle >= 0.0) || !std::isfinite(ens_oracle)) throw UsageError("acor needs a non-negative ENS");
  const auto pairs = ranked_pairs(d.observational());
  const long wanted = std::lround(static_cast<double>(d.num_variables()) * ens_oracle / 2.0);
  const auto k = std::min<std::size_t>(pairs.size(), static_cast<std::size_t>(std::max(0L, wanted)));
  MixedGraph g(d.num_variables());
  for (std::size_t e = 0; e < k; ++e) g.add_undirected(pairs[e].a, pairs[e].b);
  return g;
}

std::optional<double> bic_local_score(const Eigen::MatrixXd& covariance, std::size_t n, Node i,
                                      const NodeSet& parents, double penalty) {
  const double nd = static_cast<double>(n);
  const double variance = covariance(i, i);
  double rss = variance;
  if (!parents.empty()) {
    const auto k = static_cast<Eigen::Index>(parents.size());
    Eigen::MatrixXd s(k, k);
    Eigen::VectorXd c(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      c(a) = covariance(parents[static_cast<std::size_t>(a)], i);
      for (Eigen::Index b = 0; b < k; ++b)
        s(a, b) = covariance(parents[static_cast<std::size_t>(a)], parents[static_cast<std::size_t>(b)]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return std::nullopt;
    rss = variance - c.dot(llt.solve(c));
    if (!(rss > 1e-12 * variance) || !std::isfinite(rss)) return std::nullopt;
  } else if (!(variance > 0.0)) {
    rss = std::numeric_limits<double>::min();
  }
  return -0.5 * nd * std::log(rss) - penalty * 0.5 * std::log(nd) * static_cast<double>(parents.size() + 1);
}

namespace {

class HillClimber {
 public:
  HillClimber(const Eigen::MatrixXd& data, const GreedyBicOptions& options)
      : p_(static_cast<int>(data.cols())), n_(static_cast<std::size_t>(data.rows())), options_(options),
        graph_(p_), parents_(static_cast<std::size_t>(p_)), local_(static_cast<std::size_t>(p_)),
        gain_add_(p_, p_), gain_remove_(p_, p_) {
    const Eigen::MatrixXd centred = data.rowwise() - data.colwise().mean();
    covariance_ = centred.transpose() * centred / static_cast<double>(n_);
    for (Node i = 0; i < p_; ++i) refresh(i);
  }

  GreedyBicResult run() {
    GreedyBicResult result;
    result.score_trace.push_back(total());
    while (result.iterations < options_.max_iters) {
      if (!step()) break;
      ++result.iterations;
      result.score_trace.push_back(total());
    }
    result.graph = graph_;
    return result;
  }

 private:
  enum class MoveType { Add = 0, Remove = 1, Reverse = 2 };

  struct Move {
    double gain;
    MoveType type;
    Node from;
    Node to;
  };

  static constexpr double kMinGain = 1e-9;
  static constexpr double kInvalid = -std::numeric_limits<double>::infinity();

  double total() const {
    double s = 0.0;
    for (double v : local_) s += v;
    return s;
  }

  double score(Node i, const NodeSet& parents) const {
    const auto v = bic_local_score(covariance_, n_, i, parents, options_.score_penalty);
    return v ? *v : kInvalid;
  }

  // Recompute node i's local score and every gain whose target is i.
  void refresh(Node i) {
    const NodeSet& pa = parents_[static_cast<std::size_t>(i)];
    local_[static_cast<std::size_t>(i)] = score(i, pa);
    const double base = local_[static_cast<std::size_t>(i)];
    for (Node j = 0; j < p_; ++j) {
      gain_add_(j, i) = kInvalid;
      gain_remove_(j, i) = kInvalid;
      if (j == i) continue;
      const bool is_parent = std::binary_search(pa.begin(), pa.end(), j);
      NodeSet changed = pa;
      if (is_parent) {
        changed.erase(std::lower_bound(changed.begin(), changed.end(), j));
        gain_remove_(j, i) = score(i, changed) - base;
      } else if (static_cast<int>(pa.size()) < options_.max_parents) {
        changed.insert(std::lower_bound(changed.begin(), changed.end(), j), j);
        gain_add_(j, i) = score(i, changed) - base;
      }
    }
  }

  // Is `to` reachable from `from` along directed edges, optionally ignoring one edge?
  bool reaches(Node from, Node to, Node skip_from = -1, Node skip_to = -1) const {
    std::vector<bool> seen(static_cast<std::size_t>(p_), false);
    std::deque<Node> queue{from};
    seen[static_cast<std::size_t>(from)] = true;
    while (!queue.empty()) {
      const Node v = queue.front();
      queue.pop_front();
      for (Node w = 0; w < p_; ++w) {
        if (!graph_.mark(v, w) || seen[static_cast<std::size_t>(w)]) continue;
        if (v == skip_from && w == skip_to) continue;
        if (w == to) return true;
        seen[static_cast<std::size_t>(w)] = true;
        queue.push_back(w);
      }
    }
    return false;
  }

  bool acyclic_after(const Move& m) const {
    switch (m.type) {
      case MoveType::Add: return !reaches(m.to, m.from);
      case MoveType::Remove: return true;
      case MoveType::Reverse: return !reaches(m.from, m.to, m.from, m.to);
    }
    return false;
  }

  bool step() {
    std::vector<Move> moves;
    for (Node a = 0; a < p_; ++a) {
      for (Node b = 0; b < p_; ++b) {
        if (a == b) continue;
        if (graph_.mark(a, b)) {
          const double remove = gain_remove_(a, b);
          if (remove > kMinGain) moves.push_back({remove, MoveType::Remove, a, b});
          const double reverse = remove + gain_add_(b, a);
          if (reverse > kMinGain) moves.push_back({reverse, MoveType::Reverse, a, b});
        } else if (!graph_.mark(b, a)) {
          const double add = gain_add_(a, b);
          if (add > kMinGain) moves.push_back({add, MoveType::Add, a, b});
        }
      }
    }
    std::sort(moves.begin(), moves.end(), [](const Move& x, const Move& y) {
      if (x.gain != y.gain) return x.gain > y.gain;
      return std::tie(x.type, x.from, x.to) < std::tie(y.type, y.from, y.to);
    });
    for (const Move& m : moves) {
      if (!acyclic_after(m)) continue;
      apply(m);
      return true;
    }
    return false;
  }

  void set_parent(Node parent, Node child, bool present) {
    NodeSet& pa = parents_[static_cast<std::size_t>(child)];
    const auto it = std::lower_bound(pa.begin(), pa.end(), parent);
    if (present) pa.insert(it, parent);
    else pa.erase(it);
  }

  void apply(const Move& m) {
    switch (m.type) {
      case MoveType::Add:
        graph_.add_directed(m.from, m.to);
        set_parent(m.from, m.to, true);
        refresh(m.to);
        break;
      case MoveType::Remove:
        graph_.remove_edge(m.from, m.to);
        set_parent(m.from, m.to, false);
        refresh(m.to);
        break;
      case MoveType::Reverse:
        graph_.remove_edge(m.from, m.to);
        graph_.add_directed(m.to, m.from);
        set_parent(m.from, m.to, false);
        set_parent(m.to, m.from, true);
        refresh(m.to);
        refresh(m.from);
        break;
    }
  }

  int p_;
  std::size_t n_;
  GreedyBicOptions options_;
  Eigen::MatrixXd covariance_;
  MixedGraph graph_;
  std::vector<NodeSet> parents_;
  std::vector<double> local_;
  // gain_add_(j, i): score change of adding j as a parent of i (invalid when j is a parent).
  Eigen::MatrixXd gain_add_;
  // gain_remove_(j, i): score change of dropping parent j of i.
  Eigen::MatrixXd gain_remove_;
};

}  // namespace

GreedyBicResult greedy_bic_search(const Eigen::MatrixXd& data, const GreedyBicOptions& options) {
  if (data.rows() < 2) throw DataError("greedy BIC needs at least 2 rows");
  if (data.cols() < 1) throw DataError("greedy BIC needs at least 1 variable");
  if (options.max_parents < 0 || options.max_iters < 0) throw UsageError("greedy BIC limits must be non-negative");
  return HillClimber(data, options).run();
}

MixedGraph fit_greedy_bic(const MultiRegimeDataset& d, const LearnerConfig& config) {
  GreedyBicOptions options{config.max_iters, config.score_penalty, config.max_parents};
  return greedy_bic_search(d.observational(), options).graph;
}

MixedGraph fit_external(const MultiRegimeDataset& d, const std::vector<std::string>& command,
                        std::chrono::milliseconds timeout) {
  LearnerConfig config;
  config.kind = LearnerKind::External;
  config.command = command;
  const std::string id = learner_id(config);
  if (command.empty()) throw LearnerError(LearnerFailure::Internal, id, "empty command");

  TempDir dir("causalrisk-learner-");
  const auto csv = dir.path() / "data.csv";
  const auto specs = dir.path() / "specs.json";
  const auto out = dir.path() / "out.adj";
  write_dataset_files(d, csv.string(), specs.string());

  std::vector<std::string> argv = command;
  argv.push_back(csv.string());
  argv.push_back(specs.string());
  argv.push_back(out.string());
  const ProcessResult run = run_process(argv, dir.path(), timeout);
  if (run.spawn_failed) throw LearnerError(LearnerFailure::NonzeroExit, id, run.stderr_text);
  if (run.timed_out) {
    throw LearnerError(LearnerFailure::Timeout, id,
                       "no result within " + std::to_string(timeout.count()) + " ms", run.stderr_text);
  }
  if (run.signal != 0) {
    throw LearnerError(LearnerFailure::NonzeroExit, id, "killed by signal " + std::to_string(run.signal),
                       run.stderr_text);
  }
  if (run.exit_code != 0) {
    throw LearnerError(LearnerFailure::NonzeroExit, id, "exit status " + std::to_string(run.exit_code),
                       run.stderr_text);
  }
  std::ifstream in(out);
  if (!in) throw LearnerError(LearnerFailure::Malformed, id, "no output adjacency file", run.stderr_text);
  MixedGraph g;
  try {
    g = read_adjacency(in);
  } catch (const DataError& ex) {
    throw LearnerError(LearnerFailure::Malformed, id, ex.what(), run.stderr_text);
  }
  if (g.size() != d.num_variables()) {
    throw LearnerError(LearnerFailure::DimensionMismatch, id,
                       "adjacency matrix is " + std::to_string(g.size()) + "x" + std::to_string(g.size()) +
                           ", expected " + std::to_string(d.num_variables()) + "x" +
                           std::to_string(d.num_variables()),
                       run.stderr_text);
  }
  return g;
}

namespace {

class EmptyLearner final : public Learner {
 public:
  std::string id() const override { return "empty"; }
  MixedGraph fit(const MultiRegimeDataset& d) const override { return fit_empty(d); }
};

class ACorLearner final : public Learner {
 public:
  explicit ACorLearner(double ens) : ens_(ens) {}
  std::string id() const override { return "acor"; }
  MixedGraph fit(const MultiRegimeDataset& d) const override { return fit_acor(d, ens_); }

 private:
  double ens_;
};

class GreedyBicLearner final : public Learner {
 public:
  explicit GreedyBicLearner(LearnerConfig config) : config_(std::move(config)) {}
  std::string id() const override { return "greedy-bic"; }
  MixedGraph fit(const MultiRegimeDataset& d) const override { return fit_greedy_bic(d, config_); }

 private:
  LearnerConfig config_;
};

class ExternalLearner final : public Learner {
 public:
  explicit ExternalLearner(LearnerConfig config) : config_(std::move(config)), id_(learner_id(config_)) {}
  std::string id() const override { return id_; }
  MixedGraph fit(const MultiRegimeDataset& d) const override {
    return fit_external(d, config_.command, config_.timeout);
  }

 private:
  LearnerConfig config_;
  std::string id_;
};

}  // namespace

std::unique_ptr<Learner> make_learner(const LearnerConfig& config) {
  switch (config.kind) {
    case LearnerKind::Empty: return std::make_unique<EmptyLearner>();
    case LearnerKind::ACor:
      if (!config.ens_oracle) throw UsageError("acor needs the oracle expected neighbourhood size (--ens)");
      return std::make_unique<ACorLearner>(*config.ens_oracle);
    case LearnerKind::GreedyBic: return std::make_unique<GreedyBicLearner>(config);
    case LearnerKind::External:
      if (config.command.empty()) throw UsageError("external learner needs a command");
      return std::make_unique<ExternalLearner>(config);
  }
  throw UsageError("unknown learner kind");
}

}  // namespace causalrisk
