#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "causalrisk/harness.hpp"

namespace causalrisk {

struct ReportParameters {
  std::pair<std::string, std::string> pair;
  double tolerance = 0.1;
  int min_per_cell = 3;
};

nlohmann::json cells_to_json(const std::vector<SignAgreementCell>& cells,
                             const ReportParameters& parameters);

// Two stacked matrices: median true-risk difference (upper) and sign agreement (lower).
std::string render_svg(const std::vector<SignAgreementCell>& cells,
                       const ReportParameters& parameters);

}  // namespace causalrisk
