#include "causalrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "causalrisk/error.hpp"

namespace causalrisk {

std::string_view to_string(RiskKind kind) {
  switch (kind) {
    case RiskKind::OracleHat: return "oracle_hat";
    case RiskKind::Naive: return "naive";
    case RiskKind::CV: return "cv";
    case RiskKind::Weighted: return "weighted";
  }
  return "unknown";
}

double jaccard(const NodeSet& a, const NodeSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else { ++common; ++ia; ++ib; }
  }
  const std::size_t united = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(united);
}

namespace {

double mean_loss(const std::vector<std::pair<Node, double>>& losses) {
  double sum = 0.0;
  for (const auto& entry : losses) sum += entry.second;
  return sum / static_cast<double>(losses.size());
}

const DescendantEstimate& estimate_for(const DescendantMap& est, Node i) {
  const auto it = est.find(i);
  if (it == est.end()) {
    throw DataError("no descendant estimate for intervened node " + std::to_string(i + 1));
  }
  return it->second;
}

void check_estimates(const MultiRegimeDataset& d, const DescendantMap& est) {
  for (const auto& entry : est) {
    if (!d.has_intervention(entry.first)) {
      throw DataError("descendant estimate for node " + std::to_string(entry.first + 1) +
                      " which has no interventional data");
    }
  }
}

}  // namespace

RiskValue oracle_hat(const Dag& truth, const MixedGraph& h, std::string learner_id) {
  if (truth.size() != h.size()) {
    throw DataError("learned graph has " + std::to_string(h.size()) + " nodes, truth has " +
                    std::to_string(truth.size()));
  }
  RiskValue risk{0.0, RiskKind::OracleHat, std::move(learner_id), {}};
  for (Node i = 0; i < truth.size(); ++i) {
    risk.per_node_losses.emplace_back(i, jaccard(descendants(truth, i), possible_descendants(h, i)));
  }
  risk.value = mean_loss(risk.per_node_losses);
  return risk;
}

RiskValue naive_risk(const MultiRegimeDataset& d, const MixedGraph& h, const DescendantMap& est,
                     std::string learner_id) {
  if (h.size() != d.num_variables()) {
    throw DataError("learned graph has " + std::to_string(h.size()) + " nodes, data has " +
                    std::to_string(d.num_variables()));
  }
  const auto iota = d.intervened_nodes();
  if (iota.empty()) throw DataError("naive risk needs at least one intervention");
  check_estimates(d, est);
  RiskValue risk{0.0, RiskKind::Naive, std::move(learner_id), {}};
  for (Node i : iota) {
    risk.per_node_losses.emplace_back(i, jaccard(estimate_for(est, i).members, possible_descendants(h, i)));
  }
  risk.value = mean_loss(risk.per_node_losses);
  return risk;
}

RiskValue cv_risk(const MultiRegimeDataset& d, const Learner& learner, const DescendantMap& est) {
  const auto iota = d.intervened_nodes();
  if (iota.size() < 2) {
    throw DataError("cross-validation risk needs at least two interventions (found " +
                    std::to_string(iota.size()) + ")");
  }
  check_estimates(d, est);
  RiskValue risk{0.0, RiskKind::CV, learner.id(), {}};
  for (Node i : iota) {
    const DescendantEstimate& target = estimate_for(est, i);
    MixedGraph fitted;
    try {
      fitted = learner.fit(without_intervention(d, i));
    } catch (const LearnerError& ex) {
      throw ex.with_fold(regime_label(i));
    } catch (const std::exception& ex) {
      throw LearnerError(LearnerFailure::Internal, learner.id(), ex.what(), {}, regime_label(i));
    }
    if (fitted.size() != d.num_variables()) {
      throw LearnerError(LearnerFailure::DimensionMismatch, learner.id(),
                         "returned " + std::to_string(fitted.size()) + " nodes, expected " +
                             std::to_string(d.num_variables()),
                         {}, regime_label(i));
    }
    risk.per_node_losses.emplace_back(i, jaccard(target.members, possible_descendants(fitted, i)));
  }
  risk.value = mean_loss(risk.per_node_losses);
  return risk;
}

RiskValue weighted_risk(const RiskValue& naive, const RiskValue& cv, int p, int iota_size) {
  if (naive.kind != RiskKind::Naive || cv.kind != RiskKind::CV) {
    throw DataError("weighted risk combines a naive and a CV risk");
  }
  if (p < 1 || iota_size < 1 || iota_size > p) {
    throw DataError("weighted risk needs 1 <= |iota| <= p");
  }
  const double w_seen = static_cast<double>(iota_size) / static_cast<double>(p);
  const double w_unseen = static_cast<double>(p - iota_size) / static_cast<double>(p);
  double value = w_seen * naive.value + w_unseen * cv.value;
  // Rounding must not push the convex combination outside its endpoints.
  value = std::clamp(value, std::min(naive.value, cv.value), std::max(naive.value, cv.value));
  RiskValue risk{value, RiskKind::Weighted, naive.learner_id, {}};
  return risk;
}

nlohmann::json to_json(const RiskValue& risk) {
  nlohmann::json doc;
  doc["kind"] = std::string(to_string(risk.kind));
  doc["learner"] = risk.learner_id;
  doc["value"] = risk.value;
  auto& losses = doc[risk.kind == RiskKind::CV ? "fold_losses" : "node_losses"] = nlohmann::json::array();
  for (const auto& [node, loss] : risk.per_node_losses) {
    losses.push_back({{risk.kind == RiskKind::CV ? "fold" : "node", node + 1}, {"loss", loss}});
  }
  return doc;
}

}  // namespace causalrisk
