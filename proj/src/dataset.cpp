#include "causalrisk/dataset.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "causalrisk/error.hpp"

namespace causalrisk {

MultiRegimeDataset::MultiRegimeDataset(Block observational,
                                       std::map<Node, InterventionBlock> interventions)
    : observational_(std::move(observational)), interventions_(std::move(interventions)) {
  if (!observational_ || observational_->rows() < 1) {
    throw DataError("observational block is missing or empty");
  }
  p_ = static_cast<int>(observational_->cols());
  for (const auto& [node, block] : interventions_) {
    if (node < 0 || node >= p_) {
      throw DataError("intervention on node " + std::to_string(node + 1) + " out of range");
    }
    if (block.spec.node != node) throw DataError("intervention spec node does not match its regime");
    if (!block.data || block.data->rows() < 1) {
      throw DataError("interventional block " + std::to_string(node + 1) + " is empty");
    }
    if (block.data->cols() != p_) {
      throw DataError("interventional block " + std::to_string(node + 1) + " has " +
                      std::to_string(block.data->cols()) + " columns, expected " + std::to_string(p_));
    }
  }
}

const InterventionBlock& MultiRegimeDataset::intervention(Node i) const {
  const auto it = interventions_.find(i);
  if (it == interventions_.end()) {
    throw DataError("no interventional data for node " + std::to_string(i + 1));
  }
  return it->second;
}

std::vector<Node> MultiRegimeDataset::intervened_nodes() const {
  std::vector<Node> out;
  out.reserve(interventions_.size());
  for (const auto& entry : interventions_) out.push_back(entry.first);
  return out;
}

std::vector<int> MultiRegimeDataset::regime_labels() const {
  std::vector<int> out{kObservational};
  for (const auto& entry : interventions_) out.push_back(regime_label(entry.first));
  return out;
}

const Eigen::MatrixXd& MultiRegimeDataset::block(int label) const {
  if (label == kObservational) return observational();
  return *intervention(regime_node(label)).data;
}

std::size_t MultiRegimeDataset::total_rows() const {
  std::size_t n = static_cast<std::size_t>(observational_->rows());
  for (const auto& entry : interventions_) n += static_cast<std::size_t>(entry.second.data->rows());
  return n;
}

MultiRegimeDataset subset(const MultiRegimeDataset& d, const std::set<int>& regime_labels) {
  if (regime_labels.count(kObservational) == 0) {
    throw DataError("a subset must keep the observational regime 0");
  }
  std::map<Node, InterventionBlock> kept;
  for (int label : regime_labels) {
    if (label == kObservational) continue;
    if (label < 0 || !d.has_intervention(regime_node(label))) {
      throw DataError("regime " + std::to_string(label) + " is not present in the dataset");
    }
    kept.emplace(regime_node(label), d.intervention(regime_node(label)));
  }
  return MultiRegimeDataset(d.observational_block(), std::move(kept));
}

MultiRegimeDataset without_intervention(const MultiRegimeDataset& d, Node node) {
  if (!d.has_intervention(node)) {
    throw DataError("regime " + std::to_string(regime_label(node)) + " is not present in the dataset");
  }
  std::map<Node, InterventionBlock> kept = d.interventions();
  kept.erase(node);
  return MultiRegimeDataset(d.observational_block(), std::move(kept));
}

MultiRegimeDataset generate(const Sem& sem, const std::vector<Node>& iota, InterventionKind kind,
                            double shift, std::size_t n_int, std::size_t n_obs, Rng& rng) {
  if (iota.empty()) throw DataError("at least one intervention is required");
  if (n_int < 1 || n_obs < 1) throw DataError("sample sizes must be at least 1");
  auto observational = std::make_shared<const Eigen::MatrixXd>(sample(sem, n_obs, rng));
  std::map<Node, InterventionBlock> blocks;
  for (Node i : iota) {
    if (blocks.count(i)) throw DataError("duplicate intervention on node " + std::to_string(i + 1));
    const InterventionSpec spec{i, kind, shift};
    const Sem intervened = apply_intervention(sem, spec);
    blocks.emplace(i, InterventionBlock{spec, std::make_shared<const Eigen::MatrixXd>(
                                                  sample(intervened, n_int, rng))});
  }
  return MultiRegimeDataset(std::move(observational), std::move(blocks));
}

std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

namespace {

void write_rows(std::ostream& out, int label, const Eigen::MatrixXd& block) {
  for (Eigen::Index r = 0; r < block.rows(); ++r) {
    out << label;
    for (Eigen::Index c = 0; c < block.cols(); ++c) out << ',' << format_real(block(r, c));
    out << '\n';
  }
}

double parse_real(const std::string& text, int line_no) {
  if (text.empty()) throw DataError("data line " + std::to_string(line_no) + ": empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw DataError("data line " + std::to_string(line_no) + ": '" + text + "' is not a number");
  }
  return v;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void write_csv(std::ostream& out, const MultiRegimeDataset& d) {
  out << "regime";
  for (int j = 1; j <= d.num_variables(); ++j) out << ",X" << j;
  out << '\n';
  write_rows(out, kObservational, d.observational());
  for (const auto& [node, block] : d.interventions()) write_rows(out, regime_label(node), *block.data);
}

nlohmann::json specs_to_json(const MultiRegimeDataset& d) {
  nlohmann::json doc;
  doc["p"] = d.num_variables();
  auto& list = doc["interventions"] = nlohmann::json::array();
  for (const auto& [node, block] : d.interventions()) {
    list.push_back({{"node", node + 1},
                    {"kind", std::string(to_string(block.spec.kind))},
                    {"shift", block.spec.shift}});
  }
  return doc;
}

MultiRegimeDataset read_dataset(std::istream& csv, const nlohmann::json& specs) {
  int p = 0;
  std::map<Node, InterventionSpec> spec_by_node;
  try {
    p = specs.at("p").get<int>();
    for (const auto& entry : specs.at("interventions")) {
      const Node node = entry.at("node").get<int>() - 1;
      if (node < 0 || node >= p) {
        throw DataError("specs: intervention node " + std::to_string(node + 1) + " out of range");
      }
      InterventionSpec spec{node, parse_intervention_kind(entry.at("kind").get<std::string>()),
                            entry.at("shift").get<double>()};
      if (!spec_by_node.emplace(node, spec).second) {
        throw DataError("specs: duplicate intervention on node " + std::to_string(node + 1));
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("specs: ") + ex.what());
  } catch (const UsageError& ex) {
    throw DataError(std::string("specs: ") + ex.what());
  }
  if (p < 1) throw DataError("specs: p must be positive");

  std::string line;
  if (!std::getline(csv, line)) throw DataError("data file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (static_cast<int>(header.size()) != p + 1 || header[0] != "regime") {
    throw DataError("data header must be regime,X1..X" + std::to_string(p));
  }
  for (int j = 1; j <= p; ++j) {
    if (header[static_cast<std::size_t>(j)] != "X" + std::to_string(j)) {
      throw DataError("data header column " + std::to_string(j + 1) + " must be X" + std::to_string(j));
    }
  }

  std::map<int, std::vector<std::vector<double>>> rows;
  int line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (static_cast<int>(fields.size()) != p + 1) {
      throw DataError("data line " + std::to_string(line_no) + ": expected " + std::to_string(p + 1) +
                      " fields, found " + std::to_string(fields.size()));
    }
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError("data line " + std::to_string(line_no) + ": bad regime '" + fields[0] + "'");
    }
    if (label < 0 || label > p) {
      throw DataError("data line " + std::to_string(line_no) + ": regime " + std::to_string(label) +
                      " out of range");
    }
    if (label != kObservational && spec_by_node.count(regime_node(label)) == 0) {
      throw DataError("data line " + std::to_string(line_no) + ": regime " + std::to_string(label) +
                      " has no intervention spec");
    }
    std::vector<double> values(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) values[static_cast<std::size_t>(j)] = parse_real(fields[static_cast<std::size_t>(j + 1)], line_no);
    rows[label].push_back(std::move(values));
  }

  auto to_block = [p](const std::vector<std::vector<double>>& data) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()), p);
    for (std::size_t r = 0; r < data.size(); ++r)
      for (int c = 0; c < p; ++c) m(static_cast<Eigen::Index>(r), c) = data[r][static_cast<std::size_t>(c)];
    return std::make_shared<const Eigen::MatrixXd>(std::move(m));
  };
  if (!rows.count(kObservational)) throw DataError("data has no observational (regime 0) rows");
  std::map<Node, InterventionBlock> blocks;
  for (const auto& [node, spec] : spec_by_node) {
    const auto it = rows.find(regime_label(node));
    if (it == rows.end()) {
      throw DataError("intervention on node " + std::to_string(node + 1) + " has no data rows");
    }
    blocks.emplace(node, InterventionBlock{spec, to_block(it->second)});
  }
  return MultiRegimeDataset(to_block(rows.at(kObservational)), std::move(blocks));
}

void write_dataset_files(const MultiRegimeDataset& d, const std::string& csv_path,
                         const std::string& specs_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw DataError("cannot write " + csv_path);
  write_csv(csv, d);
  std::ofstream specs(specs_path, std::ios::binary);
  if (!specs) throw DataError("cannot write " + specs_path);
  specs << specs_to_json(d).dump(2) << '\n';
  if (!csv || !specs) throw DataError("write failed for " + csv_path);
}

MultiRegimeDataset read_dataset_files(const std::string& csv_path, const std::string& specs_path) {
  std::ifstream specs_in(specs_path);
  if (!specs_in) throw DataError("cannot open " + specs_path);
  nlohmann::json specs;
  try {
    specs = nlohmann::json::parse(specs_in);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(specs_path + ": " + ex.what());
  }
  std::ifstream csv(csv_path);
  if (!csv) throw DataError("cannot open " + csv_path);
  return read_dataset(csv, specs);
}

}  // namespace causalrisk
