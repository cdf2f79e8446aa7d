#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "causalrisk/graph.hpp"
#include "causalrisk/rng.hpp"
#include "causalrisk/sem.hpp"

namespace causalrisk {

// Regime labels follow the external convention: 0 is observational, k >= 1 is the single
// intervention on node k (1-based), i.e. on internal node k - 1.
constexpr int kObservational = 0;
inline int regime_label(Node node) { return node + 1; }
inline Node regime_node(int label) { return label - 1; }

using Block = std::shared_ptr<const Eigen::MatrixXd>;

struct InterventionBlock {
  InterventionSpec spec;
  Block data;
};

// Observational block plus one block per intervened node. Blocks are shared and immutable, so
// subsets are cheap.
class MultiRegimeDataset {
 public:
  MultiRegimeDataset() = default;
  // Throws DataError on column mismatch, empty blocks, or a spec whose node differs from its key.
  MultiRegimeDataset(Block observational, std::map<Node, InterventionBlock> interventions);

  int num_variables() const noexcept { return p_; }
  const Eigen::MatrixXd& observational() const { return *observational_; }
  const Block& observational_block() const noexcept { return observational_; }
  const std::map<Node, InterventionBlock>& interventions() const noexcept { return interventions_; }
  const InterventionBlock& intervention(Node i) const;
  bool has_intervention(Node i) const { return interventions_.count(i) != 0; }

  // iota, ascending.
  std::vector<Node> intervened_nodes() const;
  // {0} plus iota as labels, ascending.
  std::vector<int> regime_labels() const;
  const Eigen::MatrixXd& block(int label) const;
  std::size_t block_size(int label) const { return static_cast<std::size_t>(block(label).rows()); }
  // N.
  std::size_t total_rows() const;

 private:
  int p_ = 0;
  Block observational_;
  std::map<Node, InterventionBlock> interventions_;
};

// Whole blocks only. Throws DataError when a label is absent or 0 is missing.
MultiRegimeDataset subset(const MultiRegimeDataset& d, const std::set<int>& regime_labels);
// All regimes except the intervention on `node`.
MultiRegimeDataset without_intervention(const MultiRegimeDataset& d, Node node);

MultiRegimeDataset generate(const Sem& sem, const std::vector<Node>& iota, InterventionKind kind,
                            double shift, std::size_t n_int, std::size_t n_obs, Rng& rng);

// CSV: header "regime,X1,...,Xp", observational rows first, then interventions by node;
// values with 17 significant digits.
void write_csv(std::ostream& out, const MultiRegimeDataset& d);
// {"p": p, "interventions": [{"node": k, "kind": "shift"|"do-shift", "shift": s}, ...]}
nlohmann::json specs_to_json(const MultiRegimeDataset& d);
MultiRegimeDataset read_dataset(std::istream& csv, const nlohmann::json& specs);

void write_dataset_files(const MultiRegimeDataset& d, const std::string& csv_path,
                         const std::string& specs_path);
MultiRegimeDataset read_dataset_files(const std::string& csv_path, const std::string& specs_path);

// Formats with 17 significant digits (exact round trip through strtod).
std::string format_real(double value);

}  // namespace causalrisk
