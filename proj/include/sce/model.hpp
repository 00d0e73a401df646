#pragma once

// The encoder-plus-convolutional-head classifier: token and position
// embeddings, N post-norm self-attention layers, a dimension swap, then
// Conv -> ReLU -> global MaxPool1D -> FC down to two logits. Padding is
// neutralized twice: embedding vectors beyond the first EOS are zeroed and
// padded key positions are masked to -inf before the attention softmax, so
// ids after the pad boundary can never reach the logits.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sce/common.hpp"
#include "sce/tensor.hpp"
#include "sce/tokenizer.hpp"

namespace sce {

struct ModelConfig {
  std::size_t vocab_size = 4000;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t ff_dim = 128;
  std::size_t max_len = 64;
  std::size_t conv_out_channels = 100;
  std::size_t conv_kernel = 2;
  std::size_t num_classes = 2;
  double dropout_rate = 0.0;
  double eps_layernorm = 1e-5;

  void validate() const {
    if (vocab_size <= special::COUNT) throw DataError("config: vocab_size must exceed the special tokens");
    if (hidden_dim == 0 || num_heads == 0 || hidden_dim % num_heads != 0) {
      throw DataError("config: hidden_dim " + std::to_string(hidden_dim) +
                      " must be divisible by num_heads " + std::to_string(num_heads));
    }
    if (num_layers == 0 || ff_dim == 0) throw DataError("config: num_layers and ff_dim must be positive");
    if (max_len < 3) throw DataError("config: max_len must be >= 3");
    if (conv_kernel == 0 || conv_kernel > max_len) {
      throw DataError("config: conv_kernel " + std::to_string(conv_kernel) +
                      " must be in [1, max_len=" + std::to_string(max_len) + "]");
    }
    if (conv_out_channels == 0) throw DataError("config: conv_out_channels must be positive");
    if (num_classes != 2) throw DataError("config: this classifier is two-class only");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw DataError("config: dropout_rate must be in [0,1)");
    if (eps_layernorm <= 0.0) throw DataError("config: eps_layernorm must be positive");
  }

  std::size_t head_dim() const { return hidden_dim / num_heads; }

  static ModelConfig desk_default() { return ModelConfig{}; }

  static ModelConfig paper_preset() {
    ModelConfig c;
    c.hidden_dim = 768;
    c.num_layers = 12;
    c.num_heads = 12;
    c.ff_dim = 3072;
    c.max_len = 256;
    c.conv_out_channels = 100;
    c.conv_kernel = 2;
    return c;
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"vocab_size", c.vocab_size},
                     {"hidden_dim", c.hidden_dim},
                     {"num_layers", c.num_layers},
                     {"num_heads", c.num_heads},
                     {"ff_dim", c.ff_dim},
                     {"max_len", c.max_len},
                     {"conv_out_channels", c.conv_out_channels},
                     {"conv_kernel", c.conv_kernel},
                     {"num_classes", c.num_classes},
                     {"dropout_rate", c.dropout_rate},
                     {"eps_layernorm", c.eps_layernorm}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
  if (j.contains("vocab_size")) j.at("vocab_size").get_to(c.vocab_size);
  if (j.contains("hidden_dim")) j.at("hidden_dim").get_to(c.hidden_dim);
  if (j.contains("num_layers")) j.at("num_layers").get_to(c.num_layers);
  if (j.contains("num_heads")) j.at("num_heads").get_to(c.num_heads);
  if (j.contains("ff_dim")) j.at("ff_dim").get_to(c.ff_dim);
  if (j.contains("max_len")) j.at("max_len").get_to(c.max_len);
  if (j.contains("conv_out_channels")) j.at("conv_out_channels").get_to(c.conv_out_channels);
  if (j.contains("conv_kernel")) j.at("conv_kernel").get_to(c.conv_kernel);
  if (j.contains("num_classes")) j.at("num_classes").get_to(c.num_classes);
  if (j.contains("dropout_rate")) j.at("dropout_rate").get_to(c.dropout_rate);
  if (j.contains("eps_layernorm")) j.at("eps_layernorm").get_to(c.eps_layernorm);
}

struct LayerParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln1_gamma, ln1_beta;
  Tensor ff_w1, ff_b1, ff_w2, ff_b2;
  Tensor ln2_gamma, ln2_beta;
};

struct ModelParams {
  ModelConfig config;
  Tensor token_embedding;     // [vocab, d]
  Tensor position_embedding;  // [max_len, d]
  std::vector<LayerParams> layers;
  Tensor conv_w;  // [channels, d, kernel]
  Tensor conv_b;  // [channels]
  Tensor fc_w;    // [channels, classes]
  Tensor fc_b;    // [classes]

  // Canonical (name, tensor) order; optimizer state, checkpoints, and
  // gradient checks all key off this.
  std::vector<std::pair<std::string, Tensor>> named() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("token_embedding", token_embedding);
    out.emplace_back("position_embedding", position_embedding);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const std::string p = "layer" + std::to_string(i) + ".";
      const LayerParams& l = layers[i];
      out.emplace_back(p + "wq", l.wq);
      out.emplace_back(p + "bq", l.bq);
      out.emplace_back(p + "wk", l.wk);
      out.emplace_back(p + "bk", l.bk);
      out.emplace_back(p + "wv", l.wv);
      out.emplace_back(p + "bv", l.bv);
      out.emplace_back(p + "wo", l.wo);
      out.emplace_back(p + "bo", l.bo);
      out.emplace_back(p + "ln1_gamma", l.ln1_gamma);
      out.emplace_back(p + "ln1_beta", l.ln1_beta);
      out.emplace_back(p + "ff_w1", l.ff_w1);
      out.emplace_back(p + "ff_b1", l.ff_b1);
      out.emplace_back(p + "ff_w2", l.ff_w2);
      out.emplace_back(p + "ff_b2", l.ff_b2);
      out.emplace_back(p + "ln2_gamma", l.ln2_gamma);
      out.emplace_back(p + "ln2_beta", l.ln2_beta);
    }
    out.emplace_back("conv_w", conv_w);
    out.emplace_back("conv_b", conv_b);
    out.emplace_back("fc_w", fc_w);
    out.emplace_back("fc_b", fc_b);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : named()) n += t.numel();
    return n;
  }

  void zero_grad() {
    for (auto& [name, t] : named()) {
      Tensor handle = t;
      handle.zero_grad();
    }
  }
};

// Closed-form parameter count; asserted against the actual tensors in tests.
inline std::size_t param_count(const ModelConfig& c) {
  const std::size_t d = c.hidden_dim, ff = c.ff_dim;
  const std::size_t per_layer = 4 * (d * d + d)  // Q,K,V,O projections
                                + 4 * d          // two layer norms
                                + d * ff + ff + ff * d + d;
  return c.vocab_size * d + c.max_len * d + c.num_layers * per_layer +
         c.conv_out_channels * d * c.conv_kernel + c.conv_out_channels +
         c.conv_out_channels * c.num_classes + c.num_classes;
}

// Embeddings and weight matrices ~ Normal(0, 0.02^2) from a seeded
// generator; layer-norm gammas 1, everything else 0. Deterministic given
// (config, seed). Pass trainable=false for inference-only parameter sets
// (no gradient storage, no tape recording).
inline ModelParams init_params(const ModelConfig& config, std::uint64_t seed, bool trainable = true) {
  config.validate();
  rng::Engine eng(rng::mix(seed, 0x1417));
  rng::Gaussian gauss;

  auto normal = [&](Shape shape) {
    std::vector<double> data(numel_of(shape));
    for (double& v : data) v = 0.02 * gauss(eng);
    return Tensor(std::move(shape), std::move(data), trainable);
  };
  auto constant = [&](Shape shape, double value) {
    return Tensor::full(std::move(shape), value, trainable);
  };

  const std::size_t d = config.hidden_dim, ff = config.ff_dim;
  ModelParams p;
  p.config = config;
  p.token_embedding = normal({config.vocab_size, d});
  p.position_embedding = normal({config.max_len, d});
  p.layers.reserve(config.num_layers);
  for (std::size_t i = 0; i < config.num_layers; ++i) {
    LayerParams l;
    l.wq = normal({d, d});
    l.bq = constant({d}, 0.0);
    l.wk = normal({d, d});
    l.bk = constant({d}, 0.0);
    l.wv = normal({d, d});
    l.bv = constant({d}, 0.0);
    l.wo = normal({d, d});
    l.bo = constant({d}, 0.0);
    l.ln1_gamma = constant({d}, 1.0);
    l.ln1_beta = constant({d}, 0.0);
    l.ff_w1 = normal({d, ff});
    l.ff_b1 = constant({ff}, 0.0);
    l.ff_w2 = normal({ff, d});
    l.ff_b2 = constant({d}, 0.0);
    l.ln2_gamma = constant({d}, 1.0);
    l.ln2_beta = constant({d}, 0.0);
    p.layers.push_back(std::move(l));
  }
  p.conv_w = normal({config.conv_out_channels, d, config.conv_kernel});
  p.conv_b = constant({config.conv_out_channels}, 0.0);
  p.fc_w = normal({config.conv_out_channels, config.num_classes});
  p.fc_b = constant({config.num_classes}, 0.0);
  return p;
}

// A batch of fixed-length token id rows, shape [rows, cols].
struct IdBatch {
  std::size_t rows = 0, cols = 0;
  std::vector<std::int32_t> ids;  // row-major
};

// Valid prefix length per row: everything through the first EOS counts;
// rows without an EOS are treated as fully valid.
inline std::vector<std::size_t> valid_lengths(const IdBatch& batch) {
  std::vector<std::size_t> out(batch.rows, batch.cols);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    for (std::size_t c = 0; c < batch.cols; ++c) {
      if (batch.ids[r * batch.cols + c] == special::EOS) {
        out[r] = c + 1;
        break;
      }
    }
  }
  return out;
}

namespace detail {

inline Tensor key_mask_tensor(const std::vector<std::size_t>& lengths, std::size_t cols) {
  std::vector<double> m(lengths.size() * cols, 0.0);
  for (std::size_t r = 0; r < lengths.size(); ++r) {
    for (std::size_t c = lengths[r]; c < cols; ++c) {
      m[r * cols + c] = -std::numeric_limits<double>::infinity();
    }
  }
  return Tensor({lengths.size(), cols}, std::move(m), false);
}

inline Tensor valid_mask_tensor(const std::vector<std::size_t>& lengths, std::size_t cols) {
  std::vector<double> m(lengths.size() * cols, 0.0);
  for (std::size_t r = 0; r < lengths.size(); ++r) {
    for (std::size_t c = 0; c < lengths[r]; ++c) m[r * cols + c] = 1.0;
  }
  return Tensor({lengths.size(), cols}, std::move(m), false);
}

}  // namespace detail

// Scaled dot-product attention over per-head projections: softmax of
// Q K^T / sqrt(d_K) times V, with padded key positions masked to -inf
// before the softmax. Q, K, V: [n, heads, t, d_k]; key_mask: [n, t].
inline Tensor attention(GradGraph& g, const Tensor& q, const Tensor& k, const Tensor& v,
                        const Tensor& key_mask) {
  if (q.rank() != 4 || k.shape() != q.shape() || v.shape() != q.shape()) {
    throw DataError("attention: Q/K/V must share shape [n,heads,t,d_k], got " +
                    shape_str(q.shape()) + ", " + shape_str(k.shape()) + ", " + shape_str(v.shape()));
  }
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.shape().back()));
  Tensor scores = scale(g, matmul(g, q, transpose_last2(g, k)), inv_sqrt_dk);
  scores = add_key_mask(g, scores, key_mask);
  Tensor weights = softmax(g, scores, 3);
  return matmul(g, weights, v);
}

// Optional stochastic regularization hook; identity when rate is 0 or no
// engine is supplied (evaluation).
inline Tensor maybe_dropout(GradGraph& g, const Tensor& x, double rate, rng::Engine* eng) {
  if (rate <= 0.0 || eng == nullptr) return x;
  std::vector<double> mask(x.numel());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng::unit(*eng) < rate ? 0.0 : keep_scale;
  return mul(g, x, Tensor(x.shape(), std::move(mask), false));
}

// One post-norm encoder layer:
//   attn_out = LN(MHSA(x) + x);  out = LN(FF(attn_out) + attn_out)
inline Tensor encoder_layer_forward(GradGraph& g, const Tensor& x, const LayerParams& l,
                                    std::size_t heads, double eps, const Tensor& key_mask,
                                    double dropout_rate = 0.0, rng::Engine* dropout_eng = nullptr) {
  Tensor qh = split_heads(g, linear(g, x, l.wq, l.bq), heads);
  Tensor kh = split_heads(g, linear(g, x, l.wk, l.bk), heads);
  Tensor vh = split_heads(g, linear(g, x, l.wv, l.bv), heads);
  Tensor att = merge_heads(g, attention(g, qh, kh, vh, key_mask));
  Tensor mhsa = maybe_dropout(g, linear(g, att, l.wo, l.bo), dropout_rate, dropout_eng);
  Tensor attn_out = layer_norm(g, add(g, mhsa, x), l.ln1_gamma, l.ln1_beta, eps);

  Tensor hidden = relu(g, linear(g, attn_out, l.ff_w1, l.ff_b1));
  Tensor ff = maybe_dropout(g, linear(g, hidden, l.ff_w2, l.ff_b2), dropout_rate, dropout_eng);
  return layer_norm(g, add(g, ff, attn_out), l.ln2_gamma, l.ln2_beta, eps);
}

// ids [n, max_len] -> encoder stack -> [n, d, max_len] (last two dims
// swapped for the convolutional head).
inline Tensor backbone_forward(GradGraph& g, const ModelParams& p, const IdBatch& batch,
                               rng::Engine* dropout_eng = nullptr) {
  if (batch.rows == 0 || batch.cols != p.config.max_len) {
    throw DataError("backbone_forward: batch is [" + std::to_string(batch.rows) + "," +
                    std::to_string(batch.cols) + "], model max_len is " +
                    std::to_string(p.config.max_len));
  }
  const auto lengths = valid_lengths(batch);
  const Tensor key_mask = detail::key_mask_tensor(lengths, batch.cols);
  const Tensor valid = detail::valid_mask_tensor(lengths, batch.cols);

  Tensor x = gather_rows(g, p.token_embedding, batch.ids, {batch.rows, batch.cols});
  x = broadcast_add_rows(g, x, p.position_embedding);
  x = row_scale(g, x, valid);  // padding carries no embedding signal
  x = maybe_dropout(g, x, p.config.dropout_rate, dropout_eng);
  for (const LayerParams& l : p.layers) {
    x = encoder_layer_forward(g, x, l, p.config.num_heads, p.config.eps_layernorm, key_mask,
                              p.config.dropout_rate, dropout_eng);
  }
  return transpose_last2(g, x);
}

// [n, d, t] -> conv [n,channels,t-k+1] -> relu -> maxpool [n,channels,1]
// -> squeeze [n,channels] -> FC -> [n,2]
inline Tensor cnn_head_forward(GradGraph& g, const ModelParams& p, const Tensor& backbone_out) {
  Tensor c = conv1d(g, backbone_out, p.conv_w, p.conv_b);
  Tensor pooled = global_maxpool1d(g, relu(g, c));
  return linear(g, squeeze_last(g, pooled), p.fc_w, p.fc_b);
}

inline Tensor forward_logits(GradGraph& g, const ModelParams& p, const IdBatch& batch,
                             rng::Engine* dropout_eng = nullptr) {
  return cnn_head_forward(g, p, backbone_forward(g, p, batch, dropout_eng));
}

// Mean two-class cross-entropy of softmax(logits) against hard labels.
inline Tensor bce_loss(GradGraph& g, const Tensor& logits, const std::vector<int>& labels) {
  return bce_with_logits(g, logits, labels);
}

// Class-1 probability per row.
inline std::vector<double> predict_proba(const ModelParams& p, const IdBatch& batch) {
  GradGraph g;
  Tensor logits = forward_logits(g, p, batch);
  Tensor probs = softmax(g, logits, 1);
  std::vector<double> out(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) out[r] = probs.data()[r * 2 + 1];
  return out;
}

inline std::vector<int> predict_label(const ModelParams& p, const IdBatch& batch) {
  const auto probs = predict_proba(p, batch);
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > 0.5 ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints: an 8-byte little-endian manifest length, a JSON manifest
// (config, seed, epoch, metric snapshot, tensor index with shapes and
// offsets), then the raw little-endian float64 blob. Loading rejects any
// manifest/blob size mismatch.

namespace detail {

inline void write_f64_le(std::ofstream& out, std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  } else {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
      out.write(b, 8);
    }
  }
}

inline void read_f64_le(const char* src, std::span<double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(values.data(), src, values.size() * sizeof(double));
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::uint64_t bits = 0;
      for (int k = 7; k >= 0; --k) {
        bits = (bits << 8) | static_cast<unsigned char>(src[i * 8 + static_cast<std::size_t>(k)]);
      }
      std::memcpy(&values[i], &bits, 8);
    }
  }
}

}  // namespace detail

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  nlohmann::json metrics = nlohmann::json::object();
};

inline void save_checkpoint(const std::string& path, const ModelParams& params,
                            const CheckpointMeta& meta) {
  const auto named = params.named();
  nlohmann::json manifest;
  manifest["format"] = "sce-checkpoint v1";
  manifest["config"] = params.config;
  manifest["seed"] = meta.seed;
  manifest["epoch"] = meta.epoch;
  manifest["metrics"] = meta.metrics;
  nlohmann::json index = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : named) {
    index.push_back({{"name", name},
                     {"shape", t.shape()},
                     {"offset", offset},
                     {"count", t.numel()}});
    offset += t.numel() * sizeof(double);
  }
  manifest["tensors"] = index;

  const std::string mtext = manifest.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot open " + path + " for writing");
  const std::uint64_t mlen = mtext.size();
  char header[8];
  for (int i = 0; i < 8; ++i) header[i] = static_cast<char>((mlen >> (8 * i)) & 0xff);
  out.write(header, 8);
  out.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
  for (const auto& [name, t] : named) detail::write_f64_le(out, t.data());
  if (!out) throw DataError("checkpoint: write failed for " + path);
}

struct LoadedCheckpoint {
  ModelParams params;
  CheckpointMeta meta;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path, bool trainable = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.size() < 8) throw DataError("checkpoint: " + path + " is truncated");
  std::uint64_t mlen = 0;
  for (int i = 7; i >= 0; --i) {
    mlen = (mlen << 8) | static_cast<unsigned char>(content[static_cast<std::size_t>(i)]);
  }
  if (content.size() < 8 + mlen) throw DataError("checkpoint: " + path + ": manifest extends past file end");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(content.substr(8, mlen));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: " + path + ": bad manifest: " + e.what());
  }
  if (manifest.value("format", "") != std::string("sce-checkpoint v1")) {
    throw DataError("checkpoint: " + path + ": unknown format");
  }

  LoadedCheckpoint result;
  ModelConfig config = manifest.at("config").get<ModelConfig>();
  config.validate();
  result.meta.seed = manifest.value("seed", std::uint64_t{0});
  result.meta.epoch = manifest.value("epoch", std::size_t{0});
  result.meta.metrics = manifest.value("metrics", nlohmann::json::object());

  // Rebuild against the canonical parameter layout for this config.
  ModelParams expect = init_params(config, 0, false);
  const auto named = expect.named();
  const auto& index = manifest.at("tensors");
  if (!index.is_array() || index.size() != named.size()) {
    throw DataError("checkpoint: " + path + ": tensor index has " +
                    std::to_string(index.size()) + " entries, expected " +
                    std::to_string(named.size()));
  }
  const char* blob = content.data() + 8 + mlen;
  const std::size_t blob_size = content.size() - 8 - static_cast<std::size_t>(mlen);
  std::size_t expected_bytes = 0;
  std::vector<Tensor> tensors;
  tensors.reserve(named.size());
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& entry = index[i];
    const std::string name = entry.at("name").get<std::string>();
    const Shape shape = entry.at("shape").get<Shape>();
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t count = entry.at("count").get<std::size_t>();
    if (name != named[i].first || shape != named[i].second.shape()) {
      throw DataError("checkpoint: " + path + ": tensor " + std::to_string(i) + " is '" + name +
                      "' " + shape_str(shape) + ", expected '" + named[i].first + "' " +
                      shape_str(named[i].second.shape()));
    }
    if (count != numel_of(shape)) {
      throw DataError("checkpoint: " + path + ": tensor '" + name + "' count/shape mismatch");
    }
    if (offset % sizeof(double) != 0 || offset + count * sizeof(double) > blob_size) {
      throw DataError("checkpoint: " + path + ": tensor '" + name + "' overruns the blob");
    }
    std::vector<double> data(count);
    detail::read_f64_le(blob + offset, data);
    tensors.emplace_back(shape, std::move(data), trainable);
    expected_bytes += count * sizeof(double);
  }
  if (expected_bytes != blob_size) {
    throw DataError("checkpoint: " + path + ": blob is " + std::to_string(blob_size) +
                    " bytes, manifest expects " + std::to_string(expected_bytes));
  }

  ModelParams p;
  p.config = config;
  std::size_t at = 0;
  p.token_embedding = tensors[at++];
  p.position_embedding = tensors[at++];
  p.layers.resize(config.num_layers);
  for (auto& l : p.layers) {
    l.wq = tensors[at++];
    l.bq = tensors[at++];
    l.wk = tensors[at++];
    l.bk = tensors[at++];
    l.wv = tensors[at++];
    l.bv = tensors[at++];
    l.wo = tensors[at++];
    l.bo = tensors[at++];
    l.ln1_gamma = tensors[at++];
    l.ln1_beta = tensors[at++];
    l.ff_w1 = tensors[at++];
    l.ff_b1 = tensors[at++];
    l.ff_w2 = tensors[at++];
    l.ff_b2 = tensors[at++];
    l.ln2_gamma = tensors[at++];
    l.ln2_beta = tensors[at++];
  }
  p.conv_w = tensors[at++];
  p.conv_b = tensors[at++];
  p.fc_w = tensors[at++];
  p.fc_b = tensors[at++];
  result.params = std::move(p);
  return result;
}

}  // namespace sce
