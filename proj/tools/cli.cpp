#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "causalrisk/dataset.hpp"
#include "causalrisk/descend.hpp"
#include "causalrisk/error.hpp"
#include "causalrisk/graph.hpp"
#include "causalrisk/harness.hpp"
#include "causalrisk/learners.hpp"
#include "causalrisk/report.hpp"
#include "causalrisk/risk.hpp"
#include "causalrisk/rng.hpp"
#include "causalrisk/sem.hpp"

namespace causalrisk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SimulateFlags {
  int p = 25;
  double ens = 1.5;
  std::string link = "linear";
  std::string noise = "gaussian";
  std::optional<double> p_iota;
  std::string iota;
  std::string kind = "shift";
  double shift = 5.0;
  std::size_t n_int = 100;
  std::optional<std::size_t> n_obs;
  double snr = 5.0;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

struct EvaluateFlags {
  std::string data;
  std::string specs;
  std::vector<std::string> learners;
  std::optional<double> ens;
  std::string truth;
  bool oracle_descendants = false;
  double alpha = 0.05;
  std::string correction = "per-intervention";
  std::string cutoff = "normal";
  bool center = false;
  double timeout_secs = 600.0;
  std::string out;
};

struct GridFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out_dir = ".";
  std::optional<double> alpha;
  bool center = false;
  std::optional<double> timeout_secs;
};

struct ReportFlags {
  std::string results;
  std::vector<std::string> pair;
  double tolerance = 0.1;
  int min_per_cell = 3;
  std::string out_dir = ".";
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::vector<Node> parse_iota(const std::string& text, int p) {
  std::vector<Node> nodes;
  std::set<Node> seen;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--iota expects comma-separated node numbers, got '" + item + "'");
    }
    if (label < 1 || label > p) throw UsageError("--iota node " + item + " is outside 1.." + std::to_string(p));
    if (!seen.insert(label - 1).second) throw UsageError("--iota lists node " + item + " twice");
    nodes.push_back(label - 1);
  }
  return nodes;
}

DescendantOptions descend_options(double alpha, const std::string& correction, const std::string& cutoff, bool center) {
  DescendantOptions options;
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  options.alpha = alpha;
  if (correction == "per-intervention") options.scope = CorrectionScope::PerIntervention;
  else if (correction == "global") options.scope = CorrectionScope::Global;
  else throw UsageError("--correction must be per-intervention or global");
  if (cutoff == "normal") options.distribution = CutoffDistribution::Normal;
  else if (cutoff == "t") options.distribution = CutoffDistribution::StudentT;
  else throw UsageError("--cutoff must be normal or t");
  options.center_on_observational = center;
  return options;
}

json echo_args(const std::vector<std::string>& args) {
  json list = json::array();
  for (const auto& a : args) list.push_back(a);
  return list;
}

int simulate(const SimulateFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  if (!f.seed) throw UsageError("simulate requires --seed");
  if (f.p < 2) throw UsageError("--p must be at least 2");
  if (f.p_iota && !f.iota.empty()) throw UsageError("--p-iota and --iota are mutually exclusive");
  if (f.p_iota && !(*f.p_iota >= 0.0 && *f.p_iota <= 1.0)) throw UsageError("--p-iota must lie in [0, 1]");
  if (f.n_int < 1) throw UsageError("--n-int must be at least 1");
  const Link link = parse_link(f.link);
  const Noise noise = parse_noise(f.noise);
  const InterventionKind kind = parse_intervention_kind(f.kind);
  const std::size_t n_obs = f.n_obs.value_or(observational_size(f.n_int));
  if (n_obs < 2) throw UsageError("--n-obs must be at least 2");

  Rng rng = make_stream(*f.seed, 0);
  const Dag dag = random_er_dag(f.p, f.ens, rng);
  std::vector<Node> iota;
  if (!f.iota.empty()) {
    iota = parse_iota(f.iota, f.p);
  } else {
    std::bernoulli_distribution pick(f.p_iota.value_or(0.5));
    for (Node i = 0; i < f.p; ++i)
      if (pick(rng)) iota.push_back(i);
  }
  const Sem sem = build_sem(dag, link, noise, SemBuildOptions{f.snr, 50'000}, rng);
  const MultiRegimeDataset d = generate(sem, iota, kind, f.shift, f.n_int, n_obs, rng);

  const fs::path dir = prepare_dir(f.out_dir);
  write_dataset_files(d, (dir / "data.csv").string(), (dir / "specs.json").string());
  std::ostringstream adj;
  write_adjacency(adj, dag.graph());
  write_file(dir / "truth.adj", adj.str());
  json sem_doc = to_json(sem);
  sem_doc["metadata"] = {{"command", "simulate"}, {"args", echo_args(args)}, {"seed", *f.seed}};
  write_file(dir / "sem.json", sem_doc.dump(2) + "\n");
  out << "wrote " << d.total_rows() << " rows, " << iota.size() << " interventions to " << dir.string() << "\n";
  return 0;
}

int evaluate(const EvaluateFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  const DescendantOptions options = descend_options(f.alpha, f.correction, f.cutoff, f.center);
  if (f.oracle_descendants && f.truth.empty()) throw UsageError("--oracle-descendants needs --truth");
  if (!(f.timeout_secs > 0.0)) throw UsageError("--timeout-secs must be positive");
  std::vector<LearnerConfig> configs;
  for (const auto& spec : f.learners) {
    LearnerConfig config = parse_learner_spec(spec);
    config.timeout = std::chrono::milliseconds(static_cast<long long>(f.timeout_secs * 1000.0));
    if (f.ens) config.ens_oracle = *f.ens;
    configs.push_back(config);
  }
  LearnerList learners;
  for (const auto& config : configs) learners.push_back(make_learner(config));

  const MultiRegimeDataset d = read_dataset_files(f.data, f.specs);
  if (d.intervened_nodes().size() < 2) {
    throw DataError("leave-one-intervention-out cross-validation needs at least two intervened nodes; the dataset has " +
                    std::to_string(d.intervened_nodes().size()));
  }
  std::optional<Dag> truth;
  if (!f.truth.empty()) {
    std::ifstream in(f.truth);
    if (!in) throw DataError("cannot open " + f.truth);
    truth = Dag::from_graph(read_adjacency(in, d.num_variables()));
  }
  const DescendantMap est = f.oracle_descendants ? oracle_descendant_map(*truth, d.intervened_nodes())
                                                 : estimate_all_descendants(d, options);

  json doc;
  doc["metadata"] = {{"command", "evaluate"}, {"args", echo_args(args)}};
  doc["p"] = d.num_variables();
  doc["interventions"] = json::array();
  for (Node i : d.intervened_nodes()) doc["interventions"].push_back(regime_label(i));
  doc["descendants"] = json::array();
  for (const auto& [node, estimate] : est) doc["descendants"].push_back(to_json(estimate));

  const int p = d.num_variables();
  const int iota_size = static_cast<int>(d.intervened_nodes().size());
  std::vector<std::pair<std::string, RiskValue>> weighted;
  std::vector<std::optional<double>> oracle;
  doc["learners"] = json::array();
  for (const auto& learner : learners) {
    const MixedGraph h = learner->fit(d);
    if (h.size() != p) {
      throw LearnerError(LearnerFailure::DimensionMismatch, learner->id(),
                         "returned " + std::to_string(h.size()) + " nodes, expected " + std::to_string(p));
    }
    const RiskValue naive = naive_risk(d, h, est, learner->id());
    const RiskValue cv = cv_risk(d, *learner, est);
    const RiskValue w = weighted_risk(naive, cv, p, iota_size);
    json entry{{"learner", learner->id()}, {"naive", to_json(naive)}, {"cv", to_json(cv)}, {"weighted", to_json(w)}};
    if (truth) {
      const RiskValue o = oracle_hat(*truth, h, learner->id());
      entry["oracle_hat"] = to_json(o);
      oracle.push_back(o.value);
    } else {
      oracle.push_back(std::nullopt);
    }
    doc["learners"].push_back(std::move(entry));
    weighted.emplace_back(learner->id(), w);
  }
  doc["pairwise"] = json::array();
  for (std::size_t a = 0; a < weighted.size(); ++a) {
    for (std::size_t b = a + 1; b < weighted.size(); ++b) {
      json entry{{"first", weighted[a].first},
                 {"second", weighted[b].first},
                 {"weighted_difference", weighted[a].second.value - weighted[b].second.value}};
      if (oracle[a] && oracle[b]) entry["oracle_hat_difference"] = *oracle[a] - *oracle[b];
      doc["pairwise"].push_back(std::move(entry));
    }
  }
  if (f.out.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    write_file(f.out, doc.dump(2) + "\n");
  }
  return 0;
}

void write_report(const fs::path& dir, const std::vector<SignAgreementCell>& cells, const ReportParameters& parameters,
                  const json& metadata) {
  json doc = cells_to_json(cells, parameters);
  doc["metadata"] = metadata;
  write_file(dir / "cells.json", doc.dump(2) + "\n");
  write_file(dir / "report.svg", render_svg(cells, parameters));
}

int grid(const GridFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  if (!f.seed) throw UsageError("grid requires --seed");
  if (f.jobs < 1) throw UsageError("--jobs must be at least 1");
  GridConfig config = load_grid_config(f.config);
  if (f.alpha) {
    if (!(*f.alpha > 0.0 && *f.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    config.run.descend.alpha = *f.alpha;
  }
  if (f.center) config.run.descend.center_on_observational = true;
  if (f.timeout_secs) {
    if (!(*f.timeout_secs > 0.0)) throw UsageError("--timeout-secs must be positive");
    for (auto& l : config.learners) l.timeout = std::chrono::milliseconds(static_cast<long long>(*f.timeout_secs * 1000.0));
  }
  if (config.learners.empty()) throw UsageError("grid config lists no learners");

  const GridResult result = run_grid(config, *f.seed, f.jobs);
  const fs::path dir = prepare_dir(f.out_dir);
  std::ostringstream csv;
  write_results_csv(csv, result.records);
  write_file(dir / "results.csv", csv.str());

  json discarded = json::array();
  for (const auto& item : result.discarded) discarded.push_back({{"setting", item.index}, {"reason", item.reason}});
  const json metadata{{"command", "grid"}, {"args", echo_args(args)}, {"root_seed", *f.seed},
                      {"config", to_json(config)}, {"settings", grid_size(config)}, {"discarded", discarded}};
  if (config.pair) {
    const ReportParameters parameters{*config.pair, config.tolerance, config.min_per_cell};
    write_report(dir, aggregate_report(result.records, *config.pair, config.tolerance, config.min_per_cell), parameters,
                 metadata);
  } else {
    write_file(dir / "grid.json", metadata.dump(2) + "\n");
  }
  out << result.records.size() << " settings evaluated, " << result.discarded.size() << " discarded; results in "
      << dir.string() << "\n";
  return 0;
}

int report(const ReportFlags& f, const std::vector<std::string>& args, std::ostream& out) {
  if (f.pair.size() != 2) throw UsageError("--pair needs exactly two learner ids");
  std::ifstream in(f.results);
  if (!in) throw DataError("cannot open " + f.results);
  const auto records = read_results_csv(in);
  const ReportParameters parameters{{f.pair[0], f.pair[1]}, f.tolerance, f.min_per_cell};
  const auto cells = aggregate_report(records, parameters.pair, f.tolerance, f.min_per_cell);
  const fs::path dir = prepare_dir(f.out_dir);
  write_report(dir, cells, parameters, {{"command", "report"}, {"args", echo_args(args)}});
  out << cells.size() << " cells written to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal structure-learning risk evaluation"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a multi-regime dataset from a random SEM");
  sim_cmd->add_option("--p", sim.p, "Number of variables")->capture_default_str();
  sim_cmd->add_option("--ens", sim.ens, "Expected neighbourhood size")->capture_default_str();
  sim_cmd->add_option("--link", sim.link, "linear or sigmoidal")->capture_default_str();
  sim_cmd->add_option("--noise", sim.noise, "gaussian or lognormal")->capture_default_str();
  sim_cmd->add_option("--p-iota", sim.p_iota, "Probability each node is intervened on (default 0.5)");
  sim_cmd->add_option("--iota", sim.iota, "Comma-separated 1-based intervened nodes");
  sim_cmd->add_option("--kind", sim.kind, "shift or do-shift")->capture_default_str();
  sim_cmd->add_option("--shift", sim.shift, "Intervention shift")->capture_default_str();
  sim_cmd->add_option("--n-int", sim.n_int, "Rows per intervention")->capture_default_str();
  sim_cmd->add_option("--n-obs", sim.n_obs, "Observational rows (default max(n-int, 100))");
  sim_cmd->add_option("--snr", sim.snr, "Signal-to-noise ratio")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Root seed (required)");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory")->capture_default_str();

  EvaluateFlags ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Estimate causal risks of learners on a dataset");
  ev_cmd->add_option("--data", ev.data, "data.csv")->required();
  ev_cmd->add_option("--specs", ev.specs, "specs.json")->required();
  ev_cmd->add_option("--learner", ev.learners, "empty, acor, greedy-bic or external:<cmd> (repeatable)")->required();
  ev_cmd->add_option("--ens", ev.ens, "Expected neighbourhood size handed to acor");
  ev_cmd->add_option("--truth", ev.truth, "Ground-truth adjacency file; adds oracle_hat");
  ev_cmd->add_flag("--oracle-descendants", ev.oracle_descendants, "Use true descendant sets from --truth");
  ev_cmd->add_option("--alpha", ev.alpha, "Family-wise level of the descendant tests")->capture_default_str();
  ev_cmd->add_option("--correction", ev.correction, "per-intervention or global")->capture_default_str();
  ev_cmd->add_option("--cutoff", ev.cutoff, "normal or t")->capture_default_str();
  ev_cmd->add_flag("--center-on-observational", ev.center, "Normal-score each column by the observational data");
  ev_cmd->add_option("--timeout-secs", ev.timeout_secs, "External learner timeout")->capture_default_str();
  ev_cmd->add_option("--out", ev.out, "Write the JSON report here instead of stdout");

  GridFlags gr;
  auto* gr_cmd = app.add_subcommand("grid", "Run a simulation grid");
  gr_cmd->add_option("--config", gr.config, "Grid config JSON")->required();
  gr_cmd->add_option("--seed", gr.seed, "Root seed (required)");
  gr_cmd->add_option("--jobs", gr.jobs, "Worker threads")->capture_default_str();
  gr_cmd->add_option("--out-dir", gr.out_dir, "Output directory")->capture_default_str();
  gr_cmd->add_option("--alpha", gr.alpha, "Override the config's alpha");
  gr_cmd->add_flag("--center-on-observational", gr.center, "Override: normal-score by observational data");
  gr_cmd->add_option("--timeout-secs", gr.timeout_secs, "Override every learner's timeout");

  ReportFlags rp;
  auto* rp_cmd = app.add_subcommand("report", "Aggregate a results CSV into sign-agreement cells");
  rp_cmd->add_option("--results", rp.results, "results.csv")->required();
  rp_cmd->add_option("--pair", rp.pair, "Two learner ids")->required()->expected(2);
  rp_cmd->add_option("--tolerance", rp.tolerance, "Minimum |true difference|")->capture_default_str();
  rp_cmd->add_option("--min-per-cell", rp.min_per_cell, "Cells with fewer settings are empty")->capture_default_str();
  rp_cmd->add_option("--out-dir", rp.out_dir, "Output directory")->capture_default_str();

  std::vector<std::string> argv_store{"causalrisk"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  try {
    if (sim_cmd->parsed()) return simulate(sim, args, out);
    if (ev_cmd->parsed()) return evaluate(ev, args, out);
    if (gr_cmd->parsed()) return grid(gr, args, out);
    return report(rp, args, out);
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return 1;
  } catch (const LearnerError& ex) {
    err << "learner failure: " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  }
}

}  // namespace causalrisk::cli
