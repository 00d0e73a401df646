#pragma once

// Plain-text tables in the experiment-report layout: columns Accuracy,
// Precision, Recall, F1 Score, AUC as percentages, mean±STD at 2 decimals.

#include <string>
#include <vector>

#include "sce/metrics.hpp"

namespace sce {

namespace detail {

// '±' is two bytes in UTF-8 but one display column.
inline std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) ++w;
  }
  return w;
}

inline std::string render_columns(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], display_width(row[c]));
    }
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) {
        out.append(widths[c] - display_width(row[c]) + 2, ' ');
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& metric_headers() {
  static const std::vector<std::string> h = {"Accuracy(%)", "Precision(%)", "Recall(%)",
                                             "F1 Score(%)", "AUC(%)"};
  return h;
}

inline std::vector<std::string> metric_row(const MetricReport& r) {
  return {format_percent(r.accuracy), format_percent(r.precision), format_percent(r.recall),
          format_percent(r.f1), format_percent(r.auc)};
}

inline std::vector<std::string> aggregate_row(const AggregateTable& t) {
  return {format_mean_std_percent(t.accuracy), format_mean_std_percent(t.precision),
          format_mean_std_percent(t.recall), format_mean_std_percent(t.f1),
          format_mean_std_percent(t.auc)};
}

// One-row table for a single evaluation.
inline std::string render_report_table(const MetricReport& r) {
  return detail::render_columns({metric_headers(), metric_row(r)});
}

// One-row mean±STD table over a set of runs.
inline std::string render_aggregate_table(const AggregateTable& t) {
  return detail::render_columns({metric_headers(), aggregate_row(t)});
}

struct AblationRow {
  std::size_t max_len = 0;
  bool ok = false;
  std::string error;
  AggregateTable validation;
  AggregateTable test;
};

// Two sections (Validation Set / Test Set), one row per Max_Len.
inline std::string render_ablation_tables(const std::vector<AblationRow>& rows) {
  auto section = [&](const std::string& title, bool validation) {
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header = {"Max_Len"};
    for (const auto& h : metric_headers()) header.push_back(h);
    table.push_back(header);
    for (const auto& row : rows) {
      std::vector<std::string> cells = {std::to_string(row.max_len)};
      if (row.ok) {
        for (auto& c : aggregate_row(validation ? row.validation : row.test)) cells.push_back(c);
      } else {
        for (std::size_t i = 0; i < metric_headers().size(); ++i) cells.push_back("failed");
      }
      table.push_back(cells);
    }
    return title + "\n" + detail::render_columns(table);
  };
  return section("Validation Set", true) + "\n" + section("Test Set", false);
}

}  // namespace sce
