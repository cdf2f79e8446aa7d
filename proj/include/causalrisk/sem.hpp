#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "causalrisk/graph.hpp"
#include "causalrisk/rng.hpp"

namespace causalrisk {

enum class Link { Linear, Sigmoidal };
enum class Noise { Gaussian, Lognormal };
enum class InterventionKind { Shift, DoAndShift };

std::string_view to_string(Link link);
std::string_view to_string(Noise noise);
std::string_view to_string(InterventionKind kind);
// Accept "linear"/"sigmoidal", "gaussian"/"lognormal", "shift"/"do-shift". Throw UsageError.
Link parse_link(std::string_view text);
Noise parse_noise(std::string_view text);
InterventionKind parse_intervention_kind(std::string_view text);

struct InterventionSpec {
  Node node = 0;
  InterventionKind kind = InterventionKind::Shift;
  double shift = 0.0;

  friend bool operator==(const InterventionSpec&, const InterventionSpec&) = default;
};

// Linear: b * x. Sigmoidal: b * (10 / (1 + exp(-0.65 x)) - 5).
double link_eval(Link link, double b, double x);

// Mean 0, variance 1. Lognormal is (exp(Z) - e^0.5) / sqrt((e - 1) e).
double standardized_noise(Noise noise, Rng& rng);

// One structural equation: X_i = signal_scale * sum_j link(b_ji, X_j) + noise_sd * eps_i + shift.
struct Equation {
  std::vector<std::pair<Node, double>> parents;  // (j, b_ji), ascending j
  double signal_scale = 1.0;
  double noise_sd = 1.0;
  double shift = 0.0;
  // Scaling fell back to unit constants because the pilot signal had no variance.
  bool degenerate_scale = false;
  std::optional<InterventionKind> intervention;

  friend bool operator==(const Equation&, const Equation&) = default;
};

class Sem {
 public:
  Sem() = default;
  // Throws DataError unless equations[i].parents matches dag's parents of i exactly.
  Sem(Dag dag, Link link, Noise noise, std::vector<Equation> equations);

  int size() const noexcept { return dag_.size(); }
  const Dag& dag() const noexcept { return dag_; }
  Link link() const noexcept { return link_; }
  Noise noise() const noexcept { return noise_; }
  const std::vector<Equation>& equations() const noexcept { return equations_; }
  const Equation& equation(Node i) const { return equations_.at(static_cast<std::size_t>(i)); }
  // b_ji, or 0 when j is not a parent of i.
  double weight(Node j, Node i) const;

  friend bool operator==(const Sem&, const Sem&) = default;

 private:
  Dag dag_;
  Link link_ = Link::Linear;
  Noise noise_ = Noise::Gaussian;
  std::vector<Equation> equations_;
};

struct SemBuildOptions {
  double snr = 5.0;
  std::size_t pilot_samples = 50'000;
};

// Draws |b_ji| ~ U[1, 3] with a random sign for every edge, then scales every non-source node so
// that Var(X_i) = 1 and signal variance / noise variance = snr. Linear links are scaled from the
// implied covariance; sigmoidal links from a pilot Monte Carlo sample.
Sem build_sem(const Dag& dag, Link link, Noise noise, const SemBuildOptions& options, Rng& rng);
inline Sem build_sem(const Dag& dag, Link link, Noise noise, double snr, Rng& rng) {
  return build_sem(dag, link, noise, SemBuildOptions{snr, 50'000}, rng);
}

// Shift: noise mean moves to spec.shift. DoAndShift: incoming edges dropped, noise_sd reset to 1,
// noise mean spec.shift. Every other equation is untouched.
Sem apply_intervention(const Sem& sem, const InterventionSpec& spec);

// n x p matrix, rows i.i.d.; draws are consumed row by row in topological order.
Eigen::MatrixXd sample(const Sem& sem, std::size_t n, Rng& rng);

// Covariance implied by a linear SEM (any noise family); throws DataError for sigmoidal links.
Eigen::MatrixXd implied_covariance(const Sem& sem);

nlohmann::json to_json(const Sem& sem);
Sem sem_from_json(const nlohmann::json& doc);

}  // namespace causalrisk
