#pragma once

// Trainable byte-pair-encoding tokenizer. Symbols are bytes; merges are
// learned greedily by pair frequency and applied in rank order at encode
// time. Encoding always yields exactly max_len ids: BOS + tokens + EOS,
// truncated or PAD-filled.

#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sce/common.hpp"

namespace sce {

namespace special {
constexpr std::int32_t PAD = 0;
constexpr std::int32_t BOS = 1;
constexpr std::int32_t EOS = 2;
constexpr std::int32_t UNK = 3;
constexpr std::size_t COUNT = 4;
inline const char* name(std::int32_t id) {
  switch (id) {
    case PAD: return "<pad>";
    case BOS: return "<s>";
    case EOS: return "</s>";
    case UNK: return "<unk>";
    default: return nullptr;
  }
}
}  // namespace special

struct EncodedSequence {
  std::vector<std::int32_t> ids;  // length exactly max_len
  std::size_t true_length = 0;    // count of non-PAD positions
};

class Vocabulary {
public:
  Vocabulary() = default;

  // Greedy highest-frequency pair merging until vocab_size tokens exist or
  // no pair occurs at least twice. Ties go to the lexicographically
  // smaller (left, right) token pair.
  static Vocabulary train(const std::vector<std::string>& corpus, std::size_t vocab_size) {
    if (corpus.empty()) throw DataError("train_bpe: empty corpus");

    Vocabulary v;
    for (std::size_t i = 0; i < special::COUNT; ++i) {
      v.push_token(special::name(static_cast<std::int32_t>(i)));
    }

    bool seen[256] = {false};
    for (const std::string& text : corpus) {
      for (unsigned char c : text) seen[c] = true;
    }
    std::size_t alphabet = 0;
    std::int32_t byte_id[256];
    std::fill(std::begin(byte_id), std::end(byte_id), special::UNK);
    for (int c = 0; c < 256; ++c) {
      if (seen[c]) {
        byte_id[c] = v.push_token(std::string(1, static_cast<char>(c)));
        ++alphabet;
      }
    }
    if (vocab_size < special::COUNT + alphabet) {
      throw DataError("train_bpe: vocab_size " + std::to_string(vocab_size) +
                      " cannot hold " + std::to_string(alphabet) +
                      " alphabet symbols plus " + std::to_string(special::COUNT) + " specials");
    }

    std::vector<std::vector<std::int32_t>> seqs;
    seqs.reserve(corpus.size());
    for (const std::string& text : corpus) {
      std::vector<std::int32_t> s;
      s.reserve(text.size());
      for (unsigned char c : text) s.push_back(byte_id[c]);
      seqs.push_back(std::move(s));
    }

    std::unordered_map<std::uint64_t, long long> counts;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> postings;
    auto note_pair = [&](std::int32_t l, std::int32_t r, std::uint32_t seq_idx) {
      const std::uint64_t key = pack(l, r);
      ++counts[key];
      auto& post = postings[key];
      if (post.empty() || post.back() != seq_idx) post.push_back(seq_idx);
    };
    for (std::uint32_t si = 0; si < seqs.size(); ++si) {
      const auto& s = seqs[si];
      for (std::size_t i = 0; i + 1 < s.size(); ++i) note_pair(s[i], s[i + 1], si);
    }

    while (v.id_to_token_.size() < vocab_size) {
      // Best = highest count, then lexicographically smaller token pair.
      std::uint64_t best_key = 0;
      long long best_count = 1;  // require >= 2
      bool found = false;
      for (const auto& [key, count] : counts) {
        if (count < 2) continue;
        if (v.is_special_concat(key)) continue;
        if (!found || count > best_count ||
            (count == best_count && v.pair_less(key, best_key))) {
          best_key = key;
          best_count = count;
          found = true;
        }
      }
      if (!found) break;

      const std::int32_t left = static_cast<std::int32_t>(best_key >> 32);
      const std::int32_t right = static_cast<std::int32_t>(best_key & 0xffffffffu);
      const std::string merged_str = v.id_to_token_[static_cast<std::size_t>(left)] +
                                     v.id_to_token_[static_cast<std::size_t>(right)];
      std::int32_t merged_id;
      auto it = v.token_to_id_.find(merged_str);
      if (it != v.token_to_id_.end()) {
        merged_id = it->second;  // two merge paths to the same string
      } else {
        merged_id = v.push_token(merged_str);
      }
      if (!v.merge_rank_.count(best_key)) {
        v.merge_rank_[best_key] = static_cast<std::int32_t>(v.merges_.size());
        v.merge_result_[best_key] = merged_id;
        v.merges_.push_back({left, right});
      }

      auto post_it = postings.find(best_key);
      if (post_it == postings.end()) break;  // unreachable when count >= 2
      const std::vector<std::uint32_t> touched = std::move(post_it->second);
      postings.erase(post_it);
      for (std::uint32_t si : touched) {
        auto& s = seqs[si];
        bool present = false;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
          if (s[i] == left && s[i + 1] == right) {
            present = true;
            break;
          }
        }
        if (!present) continue;  // stale or duplicate posting
        for (std::size_t i = 0; i + 1 < s.size(); ++i) --counts[pack(s[i], s[i + 1])];
        std::vector<std::int32_t> rewritten;
        rewritten.reserve(s.size());
        for (std::size_t i = 0; i < s.size();) {
          if (i + 1 < s.size() && s[i] == left && s[i + 1] == right) {
            rewritten.push_back(merged_id);
            i += 2;
          } else {
            rewritten.push_back(s[i]);
            i += 1;
          }
        }
        s = std::move(rewritten);
        for (std::size_t i = 0; i + 1 < s.size(); ++i) note_pair(s[i], s[i + 1], si);
      }
    }
    return v;
  }

  // BOS + merged tokens + EOS; truncated so the total is exactly max_len
  // (EOS kept as the final position) or PAD-filled when shorter. Unknown
  // bytes become UNK. Total over all inputs.
  EncodedSequence encode(std::string_view text, std::size_t max_len) const {
    if (id_to_token_.size() < special::COUNT) throw DataError("encode: vocabulary not trained");
    if (max_len < 3) throw DataError("encode: max_len must be >= 3, got " + std::to_string(max_len));

    std::vector<std::int32_t> toks;
    toks.reserve(text.size());
    for (unsigned char c : text) {
      auto it = token_to_id_.find(std::string(1, static_cast<char>(c)));
      toks.push_back(it == token_to_id_.end() || it->second < static_cast<std::int32_t>(special::COUNT)
                         ? special::UNK
                         : it->second);
    }

    // Repeatedly apply the lowest-rank merge present.
    while (toks.size() >= 2) {
      std::int32_t best_rank = std::numeric_limits<std::int32_t>::max();
      std::uint64_t best_key = 0;
      for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
        auto it = merge_rank_.find(pack(toks[i], toks[i + 1]));
        if (it != merge_rank_.end() && it->second < best_rank) {
          best_rank = it->second;
          best_key = it->first;
        }
      }
      if (best_rank == std::numeric_limits<std::int32_t>::max()) break;
      const std::int32_t left = static_cast<std::int32_t>(best_key >> 32);
      const std::int32_t right = static_cast<std::int32_t>(best_key & 0xffffffffu);
      const std::int32_t merged = merge_result_.at(best_key);
      std::vector<std::int32_t> next;
      next.reserve(toks.size());
      for (std::size_t i = 0; i < toks.size();) {
        if (i + 1 < toks.size() && toks[i] == left && toks[i + 1] == right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(toks[i]);
          i += 1;
        }
      }
      toks = std::move(next);
    }

    EncodedSequence out;
    out.ids.assign(max_len, special::PAD);
    out.ids[0] = special::BOS;
    const std::size_t budget = max_len - 2;
    const std::size_t kept = std::min(budget, toks.size());
    for (std::size_t i = 0; i < kept; ++i) out.ids[1 + i] = toks[i];
    out.ids[1 + kept] = special::EOS;
    out.true_length = kept + 2;
    return out;
  }

  // Drops special ids and concatenates token strings.
  std::string decode(std::span<const std::int32_t> ids) const {
    std::string out;
    for (std::int32_t id : ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
        throw DataError("decode: id " + std::to_string(id) + " out of range");
      }
      if (id < static_cast<std::int32_t>(special::COUNT)) continue;
      out += id_to_token_[static_cast<std::size_t>(id)];
    }
    return out;
  }

  std::size_t size() const { return id_to_token_.size(); }
  std::size_t num_merges() const { return merges_.size(); }
  const std::string& token(std::int32_t id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::pair<std::int32_t, std::int32_t>>& merges() const { return merges_; }

  bool operator==(const Vocabulary& other) const {
    return id_to_token_ == other.id_to_token_ && merges_ == other.merges_;
  }

  // Line-oriented vocabulary file: header, id<TAB>token rows, a "#merges"
  // sentinel, then left<TAB>right rows in rank order. Tokens are escaped
  // (\\, \t, \n, \r, \xNN for bytes outside printable ASCII) so the file
  // stays valid UTF-8 and round-trips bit-exactly.
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_vocab: cannot open " + path + " for writing");
    out << "bpe-vocab v1\n";
    for (std::size_t id = 0; id < id_to_token_.size(); ++id) {
      out << id << '\t' << escape(id_to_token_[id]) << '\n';
    }
    out << "#merges\n";
    for (const auto& [l, r] : merges_) {
      out << escape(id_to_token_[static_cast<std::size_t>(l)]) << '\t'
          << escape(id_to_token_[static_cast<std::size_t>(r)]) << '\n';
    }
    if (!out) throw DataError("save_vocab: write failed for " + path);
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_vocab: cannot open " + path);
    Vocabulary v;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) -> DataError {
      return DataError("load_vocab: " + path + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (!std::getline(in, line)) throw fail("empty file");
    ++lineno;
    if (line == "bpe-vocab v1\r") line.pop_back();
    if (line != "bpe-vocab v1") throw fail("bad header '" + line + "'");

    bool in_merges = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line == "#merges") {
        if (in_merges) throw fail("duplicate #merges sentinel");
        in_merges = true;
        continue;
      }
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos) throw fail("expected <left>\\t<right>");
      if (!in_merges) {
        std::size_t id;
        try {
          id = std::stoul(line.substr(0, tab));
        } catch (const std::exception&) {
          throw fail("bad id '" + line.substr(0, tab) + "'");
        }
        if (id != v.id_to_token_.size()) {
          throw fail("id " + std::to_string(id) + " out of order, expected " +
                     std::to_string(v.id_to_token_.size()));
        }
        const std::string tok = unescape(line.substr(tab + 1), fail);
        if (id < special::COUNT && tok != special::name(static_cast<std::int32_t>(id))) {
          throw fail("special id " + std::to_string(id) + " must be " +
                     std::string(special::name(static_cast<std::int32_t>(id))));
        }
        if (v.token_to_id_.count(tok)) throw fail("duplicate token");
        v.push_token(tok);
      } else {
        const std::string l = unescape(line.substr(0, tab), fail);
        const std::string r = unescape(line.substr(tab + 1), fail);
        auto li = v.token_to_id_.find(l);
        auto ri = v.token_to_id_.find(r);
        auto mi = v.token_to_id_.find(l + r);
        if (li == v.token_to_id_.end() || ri == v.token_to_id_.end()) throw fail("merge names unknown token");
        if (mi == v.token_to_id_.end()) throw fail("merge result '" + l + r + "' not in vocabulary");
        const std::uint64_t key = pack(li->second, ri->second);
        if (!v.merge_rank_.count(key)) {
          v.merge_rank_[key] = static_cast<std::int32_t>(v.merges_.size());
          v.merge_result_[key] = mi->second;
          v.merges_.push_back({li->second, ri->second});
        } else {
          v.merges_.push_back({li->second, ri->second});
        }
      }
    }
    if (!in_merges) {
      ++lineno;
      throw fail("missing #merges sentinel");
    }
    if (v.id_to_token_.size() < special::COUNT) {
      ++lineno;
      throw fail("vocabulary lacks the 4 special tokens");
    }
    return v;
  }

private:
  static std::uint64_t pack(std::int32_t l, std::int32_t r) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(l)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(r));
  }

  std::int32_t push_token(std::string tok) {
    const auto id = static_cast<std::int32_t>(id_to_token_.size());
    token_to_id_.emplace(tok, id);
    id_to_token_.push_back(std::move(tok));
    return id;
  }

  bool is_special_concat(std::uint64_t key) const {
    const auto l = static_cast<std::size_t>(key >> 32);
    const auto r = static_cast<std::size_t>(key & 0xffffffffu);
    const std::string cat = id_to_token_[l] + id_to_token_[r];
    for (std::size_t i = 0; i < special::COUNT; ++i) {
      if (cat == special::name(static_cast<std::int32_t>(i))) return true;
    }
    return false;
  }

  bool pair_less(std::uint64_t a, std::uint64_t b) const {
    const std::string& al = id_to_token_[static_cast<std::size_t>(a >> 32)];
    const std::string& ar = id_to_token_[static_cast<std::size_t>(a & 0xffffffffu)];
    const std::string& bl = id_to_token_[static_cast<std::size_t>(b >> 32)];
    const std::string& br = id_to_token_[static_cast<std::size_t>(b & 0xffffffffu)];
    if (al != bl) return al < bl;
    return ar < br;
  }

  static std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    char buf[8];
    for (unsigned char c : s) {
      switch (c) {
        case '\\': out += "\\\\"; break;
        case '\t': out += "\\t"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        default:
          if (c < 0x20 || c > 0x7E) {
            std::snprintf(buf, sizeof(buf), "\\x%02x", c);
            out += buf;
          } else {
            out += static_cast<char>(c);
          }
      }
    }
    return out;
  }

  template <typename Fail>
  static std::string unescape(const std::string& s, Fail&& fail) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '\\') {
        out += s[i];
        continue;
      }
      if (i + 1 >= s.size()) throw fail("dangling escape");
      const char c = s[++i];
      switch (c) {
        case '\\': out += '\\'; break;
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 'x': {
          if (i + 2 >= s.size()) throw fail("truncated \\x escape");
          auto hex = [&](char h) -> int {
            if (h >= '0' && h <= '9') return h - '0';
            if (h >= 'a' && h <= 'f') return h - 'a' + 10;
            if (h >= 'A' && h <= 'F') return h - 'A' + 10;
            throw fail("bad hex digit in \\x escape");
          };
          const int hi = hex(s[i + 1]), lo = hex(s[i + 2]);
          out += static_cast<char>(hi * 16 + lo);
          i += 2;
          break;
        }
        default:
          throw fail("unknown escape '\\" + std::string(1, c) + "'");
      }
    }
    return out;
  }

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::int32_t> token_to_id_;
  std::vector<std::pair<std::int32_t, std::int32_t>> merges_;
  std::unordered_map<std::uint64_t, std::int32_t> merge_rank_;
  std::unordered_map<std::uint64_t, std::int32_t> merge_result_;
};

}  // namespace sce
