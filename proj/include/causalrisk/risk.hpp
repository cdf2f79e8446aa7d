#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "causalrisk/dataset.hpp"
#include "causalrisk/descend.hpp"
#include "causalrisk/graph.hpp"

namespace causalrisk {

enum class RiskKind { OracleHat, Naive, CV, Weighted };
std::string_view to_string(RiskKind kind);

struct RiskValue {
  double value = 0.0;
  RiskKind kind = RiskKind::OracleHat;
  std::string learner_id;
  // (node, loss). For CV the node is also the held-out fold; empty for Weighted, whose value
  // combines a naive and a CV risk.
  std::vector<std::pair<Node, double>> per_node_losses;
};

// A structure-learning algorithm. fit must be deterministic and safe to call concurrently.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string id() const = 0;
  virtual MixedGraph fit(const MultiRegimeDataset& data) const = 0;
};

// 1 - |a n b| / |a u b|, and 0 when both are empty. Inputs sorted.
double jaccard(const NodeSet& a, const NodeSet& b);

// Mean over all p nodes of J(Des(truth, i), PossDes(h, i)).
RiskValue oracle_hat(const Dag& truth, const MixedGraph& h, std::string learner_id = {});

// Mean over i in iota of J(est[i], PossDes(h, i)); h fit on all regimes.
RiskValue naive_risk(const MultiRegimeDataset& d, const MixedGraph& h, const DescendantMap& est,
                     std::string learner_id = {});

// Leave-one-intervention-out: for each i in iota the learner is fit without block i and scored
// against est[i]. Invokes the learner exactly |iota| times. LearnerError gains the fold node.
RiskValue cv_risk(const MultiRegimeDataset& d, const Learner& learner, const DescendantMap& est);

// (|iota| / p) naive + ((p - |iota|) / p) cv.
RiskValue weighted_risk(const RiskValue& naive, const RiskValue& cv, int p, int iota_size);

nlohmann::json to_json(const RiskValue& risk);

}  // namespace causalrisk
