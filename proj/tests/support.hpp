#pragma once

#include <atomic>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "causalrisk/dataset.hpp"
#include "causalrisk/graph.hpp"
#include "causalrisk/risk.hpp"
#include "causalrisk/rng.hpp"

namespace support {

using namespace causalrisk;

// Mixed graph drawn from a stream keyed by (seed, regimes); cycles and undirected edges allowed.
inline MixedGraph graph_for_regimes(int p, std::uint64_t seed, const std::vector<Node>& iota) {
  std::uint64_t key = 0x9e3779b97f4a7c15ULL;
  for (Node i : iota) key = key * 1000003ULL + static_cast<std::uint64_t>(i + 1);
  Rng rng = make_stream(seed, key, 77);
  std::uniform_int_distribution<int> kind(0, 4);
  MixedGraph g(p);
  for (Node a = 0; a < p; ++a) {
    for (Node b = a + 1; b < p; ++b) {
      switch (kind(rng)) {
        case 1: g.add_directed(a, b); break;
        case 2: g.add_directed(b, a); break;
        case 3: g.add_undirected(a, b); break;
        default: break;
      }
    }
  }
  return g;
}

// Output depends only on which interventions the dataset holds, so every fold differs.
class RegimeLearner final : public Learner {
 public:
  explicit RegimeLearner(std::uint64_t seed) : seed_(seed) {}
  std::string id() const override { return "regime-" + std::to_string(seed_); }
  MixedGraph fit(const MultiRegimeDataset& d) const override {
    return graph_for_regimes(d.num_variables(), seed_, d.intervened_nodes());
  }

 private:
  std::uint64_t seed_;
};

// Wraps a graph, counts calls and records the regimes of every dataset it is given.
class RecordingLearner final : public Learner {
 public:
  RecordingLearner(std::string id, MixedGraph graph) : id_(std::move(id)), graph_(std::move(graph)) {}
  std::string id() const override { return id_; }
  MixedGraph fit(const MultiRegimeDataset& d) const override {
    std::lock_guard lock(mutex_);
    seen_.push_back(d.intervened_nodes());
    return graph_;
  }
  std::vector<std::vector<Node>> seen() const {
    std::lock_guard lock(mutex_);
    return seen_;
  }

 private:
  std::string id_;
  MixedGraph graph_;
  mutable std::mutex mutex_;
  mutable std::vector<std::vector<Node>> seen_;
};

class ThrowingLearner final : public Learner {
 public:
  std::string id() const override { return "throws"; }
  MixedGraph fit(const MultiRegimeDataset&) const override { throw std::runtime_error("boom"); }
};

inline MixedGraph chain(int p) {
  MixedGraph g(p);
  for (Node i = 0; i + 1 < p; ++i) g.add_directed(i, i + 1);
  return g;
}

// Small dataset whose values are irrelevant; only the regime structure matters.
inline MultiRegimeDataset blank_dataset(int p, const std::vector<Node>& iota, std::size_t rows = 3) {
  auto block = std::make_shared<const Eigen::MatrixXd>(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), p));
  std::map<Node, InterventionBlock> blocks;
  for (Node i : iota) blocks[i] = {{i, InterventionKind::Shift, 5.0}, block};
  return MultiRegimeDataset(block, blocks);
}

}  // namespace support
