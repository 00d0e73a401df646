#pragma once

// Optimization protocol: Adam with bias correction, seeded epoch shuffles,
// optional per-epoch synonym augmentation, checkpoints, and the n-run
// mean±STD experiment driver.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sce/common.hpp"
#include "sce/data.hpp"
#include "sce/metrics.hpp"
#include "sce/model.hpp"
#include "sce/tokenizer.hpp"

namespace sce {

struct TrainConfig {
  std::size_t batch_size = 32;
  // 0 is allowed as an explicit smoke mode (no updates, constant loss).
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  std::size_t max_len = 64;
  double augment_p = 0.0;
  bool eval_every_epoch = false;
  std::size_t eval_batch_size = 64;

  void validate() const {
    if (batch_size == 0) throw DataError("train config: batch_size must be >= 1");
    if (learning_rate < 0.0) throw DataError("train config: learning_rate must be >= 0");
    if (epochs == 0) throw DataError("train config: epochs must be >= 1");
    if (max_len < 3) throw DataError("train config: max_len must be >= 3");
    if (augment_p < 0.0 || augment_p > 1.0) throw DataError("train config: augment_p must be in [0,1]");
  }

  // §-style paper constants: batch 200, lr 1e-6, 35 epochs, Max_Len 256.
  static TrainConfig paper_preset() {
    TrainConfig c;
    c.batch_size = 200;
    c.learning_rate = 1e-6;
    c.epochs = 35;
    c.max_len = 256;
    return c;
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
                     {"epochs", c.epochs},         {"seed", c.seed},
                     {"max_len", c.max_len},       {"augment_p", c.augment_p},
                     {"eval_every_epoch", c.eval_every_epoch}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  c = TrainConfig{};
  if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
  if (j.contains("learning_rate")) j.at("learning_rate").get_to(c.learning_rate);
  if (j.contains("epochs")) j.at("epochs").get_to(c.epochs);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
  if (j.contains("max_len")) j.at("max_len").get_to(c.max_len);
  if (j.contains("augment_p")) j.at("augment_p").get_to(c.augment_p);
  if (j.contains("eval_every_epoch")) j.at("eval_every_epoch").get_to(c.eval_every_epoch);
}

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step_count = 0;
  // First/second moments, aligned with the canonical parameter order.
  std::vector<std::vector<double>> m, v;

  static AdamState init(const std::vector<std::pair<std::string, Tensor>>& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const auto& [name, t] : params) {
      s.m.emplace_back(t.numel(), 0.0);
      s.v.emplace_back(t.numel(), 0.0);
    }
    return s;
  }
};

// One bias-corrected Adam update over every parameter tensor, reading the
// gradients accumulated by backward(). Aborts on a non-finite gradient,
// naming the parameter.
inline void adam_step(const std::vector<std::pair<std::string, Tensor>>& params,
                      AdamState& state, double lr) {
  if (state.m.size() != params.size()) {
    throw DataError("adam_step: state tracks " + std::to_string(state.m.size()) +
                    " tensors, got " + std::to_string(params.size()));
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const auto& name = params[pi].first;
    Tensor tensor = params[pi].second;
    auto grad = tensor.grad();
    auto data = tensor.data_mut();
    if (grad.size() != data.size()) {
      throw DataError("adam_step: parameter '" + name + "' has no gradient storage");
    }
    auto& m = state.m[pi];
    auto& v = state.v[pi];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double gv = grad[i];
      if (!std::isfinite(gv)) {
        throw NumericError("adam_step: non-finite gradient in '" + name + "' at index " +
                           std::to_string(i));
      }
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gv;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gv * gv;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      data[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Batched evaluation

inline IdBatch encode_batch(const Vocabulary& vocab, std::span<const LabeledRecord> records,
                            std::size_t max_len) {
  IdBatch b;
  b.rows = records.size();
  b.cols = max_len;
  b.ids.reserve(b.rows * b.cols);
  for (const auto& rec : records) {
    const EncodedSequence seq = vocab.encode(rec.text, max_len);
    b.ids.insert(b.ids.end(), seq.ids.begin(), seq.ids.end());
  }
  return b;
}

// Pure batched inference; no parameter mutation.
inline MetricReport evaluate(const ModelParams& params, const std::vector<LabeledRecord>& records,
                             const Vocabulary& vocab, std::size_t batch_size = 64) {
  if (records.empty()) throw DataError("evaluate: empty record list");
  std::vector<double> scores;
  std::vector<int> preds, labels;
  scores.reserve(records.size());
  for (std::size_t start = 0; start < records.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, records.size() - start);
    const IdBatch batch =
        encode_batch(vocab, std::span(records).subspan(start, count), params.config.max_len);
    const auto probs = predict_proba(params, batch);
    for (std::size_t i = 0; i < count; ++i) {
      scores.push_back(probs[i]);
      preds.push_back(probs[i] > 0.5 ? 1 : 0);
      labels.push_back(records[start + i].label);
    }
  }
  MetricReport report = derive(confusion(preds, labels));
  report.auc = roc_auc(scores, labels);
  return report;
}

// ---------------------------------------------------------------------------
// Training

struct TrainData {
  std::vector<LabeledRecord> train, validation, test;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::vector<double> epoch_losses;
  std::vector<MetricReport> epoch_validation;  // filled iff eval_every_epoch
  MetricReport validation;
  MetricReport test;
  double wall_seconds = 0.0;
};

// Called once per optimizer step with the record indices of the batch.
using BatchHook = std::function<void(std::size_t epoch, std::span<const std::size_t> record_indices)>;

// Seeded-shuffle mini-batch training with per-epoch mean loss. The test
// set is touched exactly once, after the final epoch. Deterministic given
// (data, config, seed).
inline RunSummary train(ModelParams& params, const TrainData& data, const Vocabulary& vocab,
                        const TrainConfig& cfg, const SynonymLexicon* lexicon = nullptr,
                        const BatchHook& hook = nullptr) {
  cfg.validate();
  if (data.train.empty()) throw DataError("train: empty training set");
  if (data.validation.empty() || data.test.empty()) {
    throw DataError("train: validation and test sets must be non-empty");
  }
  if (cfg.max_len != params.config.max_len) {
    throw DataError("train: config max_len " + std::to_string(cfg.max_len) +
                    " differs from model max_len " + std::to_string(params.config.max_len));
  }
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t n = data.train.size();
  const bool augmenting = lexicon != nullptr && !lexicon->empty() && cfg.augment_p > 0.0;

  // Without augmentation the encoding of each record never changes.
  std::vector<EncodedSequence> cache;
  if (!augmenting) {
    cache.reserve(n);
    for (const auto& rec : data.train) cache.push_back(vocab.encode(rec.text, cfg.max_len));
  }

  auto named = params.named();
  AdamState adam = AdamState::init(named);
  const bool dropout_on = params.config.dropout_rate > 0.0;

  RunSummary summary;
  summary.seed = cfg.seed;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng::Engine shuffle_eng(rng::mix(cfg.seed, 0xe0000 + epoch));
    rng::shuffle(order, shuffle_eng);
    rng::Engine dropout_eng(rng::mix(cfg.seed, 0xd0000 + epoch));

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      IdBatch batch;
      batch.rows = count;
      batch.cols = cfg.max_len;
      batch.ids.reserve(count * cfg.max_len);
      std::vector<int> labels(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t ri = order[start + i];
        labels[i] = data.train[ri].label;
        if (augmenting) {
          const LabeledRecord aug = augment(data.train[ri], *lexicon, cfg.augment_p,
                                            rng::mix(cfg.seed, (epoch << 32) ^ ri));
          const EncodedSequence seq = vocab.encode(aug.text, cfg.max_len);
          batch.ids.insert(batch.ids.end(), seq.ids.begin(), seq.ids.end());
        } else {
          const auto& seq = cache[ri];
          batch.ids.insert(batch.ids.end(), seq.ids.begin(), seq.ids.end());
        }
      }

      GradGraph graph;
      Tensor logits = forward_logits(graph, params, batch, dropout_on ? &dropout_eng : nullptr);
      Tensor loss = bce_loss(graph, logits, labels);
      const double loss_value = loss.value();
      if (!std::isfinite(loss_value)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(start / cfg.batch_size));
      }
      params.zero_grad();
      graph.backward(loss);
      adam_step(named, adam, cfg.learning_rate);
      loss_sum += loss_value * static_cast<double>(count);
      if (hook) hook(epoch, std::span(order).subspan(start, count));
    }
    summary.epoch_losses.push_back(loss_sum / static_cast<double>(n));
    if (cfg.eval_every_epoch) {
      summary.epoch_validation.push_back(evaluate(params, data.validation, vocab, cfg.eval_batch_size));
    }
  }

  summary.validation = evaluate(params, data.validation, vocab, cfg.eval_batch_size);
  summary.test = evaluate(params, data.test, vocab, cfg.eval_batch_size);
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return summary;
}

// ---------------------------------------------------------------------------
// Multi-seed experiment driver

struct RunOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunSummary summary;
};

struct MultiRunResult {
  std::vector<RunOutcome> runs;
  bool has_aggregate = false;
  AggregateTable validation_agg;
  AggregateTable test_agg;
};

// Runs train+evaluate with seeds base..base+n-1 (fresh parameter init per
// seed) and aggregates mean±STD. Failures are kept as markers; aggregation
// covers the successful runs when at least two exist.
inline MultiRunResult multi_seed_run(const ModelConfig& model_cfg, const TrainConfig& base_cfg,
                                     const TrainData& data, const Vocabulary& vocab,
                                     std::size_t n_runs,
                                     const SynonymLexicon* lexicon = nullptr) {
  if (n_runs < 2) throw DataError("multi_seed_run: n_runs must be >= 2");
  MultiRunResult result;
  result.runs.reserve(n_runs);
  for (std::size_t i = 0; i < n_runs; ++i) {
    RunOutcome outcome;
    outcome.seed = base_cfg.seed + i;
    try {
      ModelParams params = init_params(model_cfg, outcome.seed);
      TrainConfig cfg = base_cfg;
      cfg.seed = outcome.seed;
      outcome.summary = train(params, data, vocab, cfg, lexicon);
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
    result.runs.push_back(std::move(outcome));
  }
  std::vector<MetricReport> val_reports, test_reports;
  for (const auto& r : result.runs) {
    if (r.ok) {
      val_reports.push_back(r.summary.validation);
      test_reports.push_back(r.summary.test);
    }
  }
  if (val_reports.size() >= 2) {
    result.validation_agg = aggregate_mean_std(val_reports);
    result.test_agg = aggregate_mean_std(test_reports);
    result.has_aggregate = true;
  }
  return result;
}

// ---------------------------------------------------------------------------
// JSON forms

inline nlohmann::json metric_report_to_json(const MetricReport& r) {
  return {{"accuracy", r.accuracy},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"auc", r.auc},
          {"degenerate",
           {{"precision", r.precision_degenerate},
            {"recall", r.recall_degenerate},
            {"f1", r.f1_degenerate}}}};
}

inline MetricReport metric_report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.accuracy = j.at("accuracy").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  r.auc = j.at("auc").get<double>();
  if (j.contains("degenerate")) {
    r.precision_degenerate = j["degenerate"].value("precision", false);
    r.recall_degenerate = j["degenerate"].value("recall", false);
    r.f1_degenerate = j["degenerate"].value("f1", false);
  }
  return r;
}

inline nlohmann::json aggregate_to_json(const AggregateTable& t) {
  auto ms = [](const MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
  return {{"n_runs", t.n_runs},   {"accuracy", ms(t.accuracy)}, {"precision", ms(t.precision)},
          {"recall", ms(t.recall)}, {"f1", ms(t.f1)},           {"auc", ms(t.auc)}};
}

inline nlohmann::json run_summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["epoch_losses"] = s.epoch_losses;
  j["validation"] = metric_report_to_json(s.validation);
  j["test"] = metric_report_to_json(s.test);
  j["wall_seconds"] = s.wall_seconds;
  if (!s.epoch_validation.empty()) {
    nlohmann::json per_epoch = nlohmann::json::array();
    for (const auto& r : s.epoch_validation) per_epoch.push_back(metric_report_to_json(r));
    j["epoch_validation"] = per_epoch;
  }
  return j;
}

}  // namespace sce
