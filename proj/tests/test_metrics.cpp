#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sce/metrics.hpp"
#include "sce/report.hpp"

#include "oracles.hpp"

using namespace sce;

TEST_CASE("confusion counts", "[metrics]") {
  const auto perfect = confusion(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1});
  REQUIRE(perfect.tp == 2);
  REQUIRE(perfect.tn == 1);
  REQUIRE(perfect.fp == 0);
  REQUIRE(perfect.fn == 0);

  const std::vector<int> preds = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<int> labels = {1, 1, 0, 0, 1, 0, 0, 0, 0, 0};
  const auto c = confusion(preds, labels);
  REQUIRE(c.tp == 2);
  REQUIRE(c.fp == 2);
  REQUIRE(c.fn == 1);
  REQUIRE(c.tn == 5);
  REQUIRE(c.total() == 10);

  const auto none = confusion(std::vector<int>{0, 0}, std::vector<int>{1, 0});
  REQUIRE(none.tp == 0);
  REQUIRE(none.fp == 0);

  REQUIRE_THROWS_AS(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), DataError);
  REQUIRE_THROWS_AS(confusion(std::vector<int>{2}, std::vector<int>{1}), DataError);
  REQUIRE_THROWS_AS(confusion(std::vector<int>{}, std::vector<int>{}), DataError);
}

TEST_CASE("derive from confusion counts", "[metrics]") {
  const MetricReport r = derive(ConfusionCounts{2, 1, 1, 6});
  REQUIRE(r.accuracy == Catch::Approx(0.8).margin(1e-15));
  REQUIRE(r.precision == Catch::Approx(2.0 / 3.0).margin(1e-15));
  REQUIRE(r.recall == Catch::Approx(2.0 / 3.0).margin(1e-15));
  REQUIRE(r.f1 == Catch::Approx(2.0 / 3.0).margin(1e-15));
  REQUIRE_FALSE(r.precision_degenerate);

  const MetricReport ideal = derive(ConfusionCounts{3, 0, 0, 7});
  REQUIRE(ideal.accuracy == 1.0);
  REQUIRE(ideal.precision == 1.0);
  REQUIRE(ideal.recall == 1.0);
  REQUIRE(ideal.f1 == 1.0);

  const MetricReport degen = derive(ConfusionCounts{0, 0, 2, 8});
  REQUIRE(degen.precision == 0.0);
  REQUIRE(degen.precision_degenerate);
  REQUIRE(degen.f1 == 0.0);
  REQUIRE(degen.f1_degenerate);

  // f1 is the harmonic mean of the reported precision/recall
  const MetricReport h = derive(ConfusionCounts{5, 3, 2, 10});
  REQUIRE(std::abs(h.f1 - 2.0 * h.precision * h.recall / (h.precision + h.recall)) < 1e-12);
}

TEST_CASE("roc_auc contract examples", "[metrics]") {
  const std::vector<double> s = {0.9, 0.8, 0.3, 0.1};
  REQUIRE(roc_auc(s, std::vector<int>{1, 1, 0, 0}) == 1.0);
  REQUIRE(oracles::auc_pairwise(s, {0, 1, 0, 1}) == 0.25);
  REQUIRE(roc_auc(s, std::vector<int>{0, 1, 0, 1}) == 0.25);

  const std::vector<double> flat = {0.4, 0.4, 0.4, 0.4};
  REQUIRE(roc_auc(flat, std::vector<int>{1, 0, 1, 0}) == 0.5);

  REQUIRE_THROWS_AS(roc_auc(s, std::vector<int>{1, 1, 1, 1}), NumericError);
}

TEST_CASE("roc_auc equals the pairwise oracle exactly", "[metrics]") {
  rng::Engine eng(rng::mix(123, 0));
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng::below(eng, 400);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool saw[2] = {false, false};
    for (std::size_t i = 0; i < n; ++i) {
      // quantized scores force plenty of ties
      scores[i] = static_cast<double>(rng::below(eng, 12)) / 11.0;
      labels[i] = static_cast<int>(rng::below(eng, 2));
      saw[labels[i]] = true;
    }
    if (!saw[0]) labels[0] = 0;
    if (!saw[1]) labels[n - 1] = 1;
    REQUIRE(roc_auc(scores, labels) == oracles::auc_pairwise(scores, labels));
  }
}

TEST_CASE("roc_auc symmetry and monotone invariance", "[metrics]") {
  rng::Engine eng(rng::mix(124, 0));
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 4 + rng::below(eng, 100);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng::unit(eng);  // continuous, ties have probability 0
      labels[i] = static_cast<int>(rng::below(eng, 2));
    }
    labels[0] = 0;
    labels[1] = 1;
    std::vector<double> flipped(n), warped(n);
    for (std::size_t i = 0; i < n; ++i) {
      flipped[i] = 1.0 - scores[i];
      warped[i] = std::exp(3.0 * scores[i]) + 1.0;  // strictly monotone
    }
    const double auc = roc_auc(scores, labels);
    REQUIRE(roc_auc(flipped, labels) == Catch::Approx(1.0 - auc).margin(1e-12));
    REQUIRE(roc_auc(warped, labels) == auc);
  }
}

TEST_CASE("majority-class accuracy floor on the corpus class balance", "[metrics]") {
  // 110,040 posts, 35,270 positive: the all-negative predictor scores the
  // negative share, the floor a trained model has to beat.
  ConfusionCounts c;
  c.tn = 110040 - 35270;
  c.fn = 35270;
  const MetricReport r = derive(c);
  REQUIRE(r.accuracy == Catch::Approx(static_cast<double>(110040 - 35270) / 110040.0).margin(1e-12));
  REQUIRE(r.accuracy == Catch::Approx(0.6794).margin(5e-4));
}

TEST_CASE("aggregate mean and population std", "[metrics]") {
  MetricReport a, b;
  a.accuracy = 0.97;
  b.accuracy = 0.99;
  a.precision = b.precision = 0.5;
  a.recall = b.recall = 0.5;
  a.f1 = b.f1 = 0.5;
  a.auc = b.auc = 0.5;
  const AggregateTable t = aggregate_mean_std({a, b});
  REQUIRE(t.accuracy.mean == Catch::Approx(0.98).margin(1e-15));
  REQUIRE(t.accuracy.std == Catch::Approx(0.01).margin(1e-15));
  REQUIRE(t.precision.std == 0.0);

  const AggregateTable same = aggregate_mean_std({a, a, a});
  REQUIRE(same.accuracy.std == 0.0);
  REQUIRE(same.n_runs == 3);

  REQUIRE_THROWS_AS(aggregate_mean_std({a}), DataError);
}

TEST_CASE("table rendering in percent mean±std", "[metrics]") {
  REQUIRE(format_mean_std_percent(MeanStd{0.98, 0.0009}) == "98.00±0.09");
  REQUIRE(format_mean_std_percent(MeanStd{1.0, 0.0}) == "100.00±0.00");
  REQUIRE(format_percent(0.9763) == "97.63");

  AggregateTable t;
  t.accuracy = {0.98, 0.0009};
  t.precision = {0.9698, 0.0022};
  t.recall = {0.9664, 0.0030};
  t.f1 = {0.9681, 0.0014};
  t.auc = {0.9763, 0.0013};
  t.n_runs = 5;
  const std::string table = render_aggregate_table(t);
  REQUIRE(table.find("Accuracy(%)") != std::string::npos);
  REQUIRE(table.find("98.00±0.09") != std::string::npos);
  REQUIRE(table.find("AUC(%)") != std::string::npos);
}

TEST_CASE("ablation table layout", "[metrics]") {
  AggregateTable t;
  t.accuracy = t.precision = t.recall = t.f1 = t.auc = {0.5, 0.0};
  t.n_runs = 3;
  AblationRow ok{64, true, "", t, t};
  AblationRow bad{128, false, "boom", {}, {}};
  const std::string text = render_ablation_tables({ok, bad});
  REQUIRE(text.find("Validation Set") != std::string::npos);
  REQUIRE(text.find("Test Set") != std::string::npos);
  REQUIRE(text.find("Max_Len") != std::string::npos);
  REQUIRE(text.find("64") != std::string::npos);
  REQUIRE(text.find("failed") != std::string::npos);
}
