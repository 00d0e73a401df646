#pragma once

// Confusion-matrix metrics, ROC/AUC, and mean±STD aggregation across runs.
// Positive class is label 1 throughout. All functions are pure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "sce/common.hpp"

namespace sce {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  // Zero-denominator metrics are reported as 0.0 and flagged instead of NaN
  // so aggregation stays total.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
};

inline ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw DataError("confusion: " + std::to_string(predicted.size()) + " predictions vs " +
                    std::to_string(truth.size()) + " labels");
  }
  if (predicted.empty()) throw DataError("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i], y = truth[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
      throw DataError("confusion: values must be 0 or 1 (row " + std::to_string(i) + ")");
    }
    if (p == 1 && y == 1) ++c.tp;
    else if (p == 1 && y == 0) ++c.fp;
    else if (p == 0 && y == 1) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// Derives everything except AUC, which needs scores rather than labels.
inline MetricReport derive(const ConfusionCounts& c) {
  if (c.total() == 0) throw DataError("derive: empty confusion counts");
  MetricReport r;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp > 0) {
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    r.precision_degenerate = true;
  }
  if (c.tp + c.fn > 0) {
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    r.recall_degenerate = true;
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.f1_degenerate = true;
  }
  return r;
}

// Tie-aware AUC: the probability that a random positive outscores a random
// negative, ties counting one half. Computed by rank sweep; agrees exactly
// with the O(n^2) pairwise count because every intermediate value (ranks,
// half-ties) is representable.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("roc_auc: " + std::to_string(scores.size()) + " scores vs " +
                    std::to_string(labels.size()) + " labels");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("roc_auc: labels must be 0 or 1");
    (y == 1 ? n_pos : n_neg)++;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw NumericError("roc_auc: undefined with a single class (" + std::to_string(n_pos) +
                       " positives, " + std::to_string(n_neg) + " negatives)");
  }

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });

  // Average ranks within tie groups (1-based).
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population STD (divisor n)
};

struct AggregateTable {
  MeanStd accuracy, precision, recall, f1, auc;
  std::size_t n_runs = 0;
};

inline MeanStd mean_std(std::span<const double> values) {
  bool all_same = true;
  for (double v : values) all_same = all_same && v == values[0];
  if (all_same) return MeanStd{values[0], 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return MeanStd{mean, std::sqrt(var)};
}

inline AggregateTable aggregate_mean_std(const std::vector<MetricReport>& reports) {
  if (reports.size() < 2) {
    throw DataError("aggregate_mean_std: need at least 2 reports, got " + std::to_string(reports.size()));
  }
  auto collect = [&](double MetricReport::* field) {
    std::vector<double> vals;
    vals.reserve(reports.size());
    for (const auto& r : reports) vals.push_back(r.*field);
    return mean_std(vals);
  };
  AggregateTable t;
  t.accuracy = collect(&MetricReport::accuracy);
  t.precision = collect(&MetricReport::precision);
  t.recall = collect(&MetricReport::recall);
  t.f1 = collect(&MetricReport::f1);
  t.auc = collect(&MetricReport::auc);
  t.n_runs = reports.size();
  return t;
}

// "98.00±0.09" from (0.98, 0.0009): percent, two decimals.
inline std::string format_mean_std_percent(const MeanStd& ms) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f±%.2f", 100.0 * ms.mean, 100.0 * ms.std);
  return buf;
}

inline std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

}  // namespace sce
