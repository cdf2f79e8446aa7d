#include "causalrisk/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace causalrisk {

namespace {

nlohmann::json number_or_null(double value, bool empty) {
  if (empty || !std::isfinite(value)) return nullptr;
  return value;
}

std::string fixed(double value, int digits) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Blue for negative, red for positive, white at zero.
std::string diverging(double value, double limit) {
  const double t = std::clamp(value / limit, -1.0, 1.0);
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
  char buffer[16];
  if (t >= 0) std::snprintf(buffer, sizeof buffer, "#ff%02x%02x", fade, fade);
  else std::snprintf(buffer, sizeof buffer, "#%02x%02xff", fade, fade);
  return buffer;
}

// Red at 0, yellow at 0.5, green at 1.
std::string sequential(double value) {
  const double t = std::clamp(value, 0.0, 1.0);
  const int red = t < 0.5 ? 230 : static_cast<int>(std::lround(230.0 * (1.0 - t) * 2.0));
  const int green = t > 0.5 ? 200 : static_cast<int>(std::lround(200.0 * t * 2.0));
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "#%02x%02x50", red, green);
  return buffer;
}

using RowKey = std::pair<int, std::size_t>;
using ColumnKey = std::tuple<Link, Noise, InterventionKind, double>;

}  // namespace

nlohmann::json cells_to_json(const std::vector<SignAgreementCell>& cells, const ReportParameters& parameters) {
  nlohmann::json doc;
  doc["pair"] = {parameters.pair.first, parameters.pair.second};
  doc["tolerance"] = parameters.tolerance;
  doc["min_per_cell"] = parameters.min_per_cell;
  auto& list = doc["cells"] = nlohmann::json::array();
  for (const auto& cell : cells) {
    list.push_back({{"p", cell.key.p},
                    {"n_int", cell.key.n_int},
                    {"link", to_string(cell.key.link)},
                    {"noise", to_string(cell.key.noise)},
                    {"kind", to_string(cell.key.kind)},
                    {"p_iota", cell.key.p_iota},
                    {"total_settings", cell.total_settings},
                    {"settings_count", cell.settings_count},
                    {"empty", cell.empty},
                    {"median_true_difference", number_or_null(cell.median_true_difference, cell.empty)},
                    {"sign_agreement", number_or_null(cell.sign_agreement, cell.empty)}});
  }
  return doc;
}

std::string render_svg(const std::vector<SignAgreementCell>& cells, const ReportParameters& parameters) {
  std::set<RowKey> row_keys;
  std::set<ColumnKey> column_keys;
  std::map<std::pair<RowKey, ColumnKey>, const SignAgreementCell*> lookup;
  double limit = 0.0;
  for (const auto& cell : cells) {
    const RowKey row{cell.key.p, cell.key.n_int};
    const ColumnKey column{cell.key.link, cell.key.noise, cell.key.kind, cell.key.p_iota};
    row_keys.insert(row);
    column_keys.insert(column);
    lookup[{row, column}] = &cell;
    if (!cell.empty) limit = std::max(limit, std::abs(cell.median_true_difference));
  }
  if (limit == 0.0) limit = 1.0;
  const std::vector<RowKey> rows(row_keys.begin(), row_keys.end());
  const std::vector<ColumnKey> columns(column_keys.begin(), column_keys.end());

  const int cell_w = 64, cell_h = 24, left = 110, top = 60, header_h = 70, gap = 50;
  const int panel_h = header_h + cell_h * static_cast<int>(std::max<std::size_t>(rows.size(), 1));
  const int width = left + cell_w * static_cast<int>(std::max<std::size_t>(columns.size(), 1)) + 20;
  const int height = top + 2 * panel_h + gap + 20;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"10\" y=\"20\" font-size=\"13\">" << escape_xml(parameters.pair.first) << " vs "
      << escape_xml(parameters.pair.second) << " (tolerance " << fixed(parameters.tolerance, 2)
      << ", min " << parameters.min_per_cell << " per cell)</text>\n";
  if (cells.empty()) svg << "<text x=\"10\" y=\"40\">no settings</text>\n";

  for (int panel = 0; panel < 2; ++panel) {
    const int y0 = top + panel * (panel_h + gap);
    svg << "<text x=\"10\" y=\"" << y0 - 8 << "\" font-size=\"12\">"
        << (panel == 0 ? "median true risk difference" : "sign agreement of weighted estimates") << "</text>\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& [link, noise, kind, p_iota] = columns[c];
      const int x = left + static_cast<int>(c) * cell_w + cell_w / 2;
      int line = 0;
      for (const std::string& label : {std::string(to_string(link)), std::string(to_string(noise)),
                                       std::string(to_string(kind)), "P=" + fixed(p_iota, 2)}) {
        svg << "<text x=\"" << x << "\" y=\"" << y0 + 14 + 14 * line++ << "\" text-anchor=\"middle\">"
            << escape_xml(label) << "</text>\n";
      }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int y = y0 + header_h + static_cast<int>(r) * cell_h;
      svg << "<text x=\"10\" y=\"" << y + cell_h / 2 + 4 << "\">p=" << rows[r].first << " n=" << rows[r].second
          << "</text>\n";
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const int x = left + static_cast<int>(c) * cell_w;
        const auto it = lookup.find({rows[r], columns[c]});
        const SignAgreementCell* cell = it == lookup.end() ? nullptr : it->second;
        std::string fill = "#dddddd", label = "n/a";
        if (cell && !cell->empty) {
          const double value = panel == 0 ? cell->median_true_difference : cell->sign_agreement;
          fill = panel == 0 ? diverging(value, limit) : sequential(value);
          label = fixed(value, 2);
        }
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\"" << cell_h
            << "\" fill=\"" << fill << "\" stroke=\"white\"/>\n";
        svg << "<text x=\"" << x + cell_w / 2 << "\" y=\"" << y + cell_h / 2 + 4 << "\" text-anchor=\"middle\">"
            << label << "</text>\n";
      }
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace causalrisk
