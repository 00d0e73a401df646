#pragma once

// Corpus engineering: three-step cleaning, CSV/JSONL I/O, synonym
// augmentation, and the stratified 8:1:1 split.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sce/common.hpp"

namespace sce {

struct LabeledRecord {
  std::string id;
  std::string text;
  int label = 0;  // 1 = suicide, 0 = non-suicide
};

// ---------------------------------------------------------------------------
// UTF-8

namespace utf8 {

// Strict decoder; rejects overlong forms, surrogates, and values past
// U+10FFFF.
inline std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw DataError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > s.size()) throw DataError("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) throw DataError("invalid UTF-8 continuation at offset " + std::to_string(i + k));
      cp = (cp << 6) | (b & 0x3F);
    }
    constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (len > 1 && cp < kMin[len]) throw DataError("overlong UTF-8 sequence at offset " + std::to_string(i));
    if (cp >= 0xD800 && cp <= 0xDFFF) throw DataError("UTF-8 surrogate at offset " + std::to_string(i));
    if (cp > 0x10FFFF) throw DataError("UTF-8 value out of range at offset " + std::to_string(i));
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace utf8

// ---------------------------------------------------------------------------
// Cleaning

struct CleanRules {
  // A record with fewer surviving whitespace-delimited tokens is a
  // sentence fragment and is rejected.
  std::size_t min_tokens = 3;
  // Codepoint blocks stripped as emoticons.
  std::vector<std::pair<char32_t, char32_t>> emoticon_blocks = {
      {0x1F300, 0x1F5FF}, {0x1F600, 0x1F64F}, {0x1F680, 0x1F6FF},
      {0x1F900, 0x1F9FF}, {0x1FA70, 0x1FAFF}, {0x2600, 0x26FF},
      {0x2700, 0x27BF},   {0xFE00, 0xFE0F},   {0x1F1E6, 0x1F1FF},
  };
};

enum class RejectReason { None, Fragment };

struct CleanOutcome {
  std::string text;  // meaningful iff kept
  RejectReason reject = RejectReason::None;
  bool kept() const { return reject == RejectReason::None; }
};

namespace detail {

// Canonical decomposition of Latin-1 Supplement and Latin Extended-A
// precomposed letters to their ASCII base letter; 0 where the codepoint has
// no canonical decomposition (those fall to the ASCII filter instead).
inline char latin_base(char32_t cp) {
  static constexpr const char kLatin1[0x40 + 1] =  // U+00C0..U+00FF
      "AAAAAA\0CEEEEIIII\0NOOOOO\0\0UUUUY\0\0aaaaaa\0ceeeeiiii\0nooooo\0\0uuuuy\0y";
  static constexpr const char kExtA[0x80 + 1] =  // U+0100..U+017F
      "AaAaAaCcCcCcCcDd\0\0EeEeEeEeEeGgGgGgGgHh\0\0IiIiIiIiI\0\0\0JjKk\0LlLlLl\0\0\0\0"
      "NnNnNn\0\0\0OoOoOo\0\0RrRrRrSsSsSsSsTtTt\0\0UuUuUuUuUuUuWwYyYZzZzZz\0";
  if (cp >= 0xC0 && cp <= 0xFF) return kLatin1[cp - 0xC0];
  if (cp >= 0x100 && cp <= 0x17F) return kExtA[cp - 0x100];
  return 0;
}

inline bool is_combining_mark(char32_t cp) { return cp >= 0x300 && cp <= 0x36F; }

inline bool is_url_token(std::string_view tok) {
  // scheme://... with a plausible scheme, or a www. prefix
  const std::size_t pos = tok.find("://");
  if (pos != std::string_view::npos && pos > 0) {
    bool scheme_ok = std::isalpha(static_cast<unsigned char>(tok[0])) != 0;
    for (std::size_t i = 1; i < pos && scheme_ok; ++i) {
      const char c = tok[i];
      scheme_ok = std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
    }
    if (scheme_ok) return true;
  }
  if (tok.size() >= 5) {
    std::string head(tok.substr(0, 4));
    for (char& c : head) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (head == "www.") return true;
  }
  return false;
}

}  // namespace detail

// Three steps, in order: 1) strip hyperlinks, emoticon blocks, and accents
// (canonical decomposition, combining marks dropped); 2) drop everything
// outside printable ASCII, mapping other whitespace to a space; 3) reject
// the record as a fragment when fewer than min_tokens tokens survive.
// Case, punctuation, and stop-words are preserved. Idempotent.
inline CleanOutcome clean_record(std::string_view raw, const CleanRules& rules = {}) {
  const std::vector<char32_t> cps = utf8::decode(raw);

  // URL stripping works on whitespace-delimited spans of the raw text.
  std::vector<bool> drop(cps.size(), false);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (cps[i] == U' ' || cps[i] == U'\t' || cps[i] == U'\n' || cps[i] == U'\r' ||
        cps[i] == U'\f' || cps[i] == U'\v') {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string tok;
    while (j < cps.size() && cps[j] != U' ' && cps[j] != U'\t' && cps[j] != U'\n' &&
           cps[j] != U'\r' && cps[j] != U'\f' && cps[j] != U'\v') {
      if (cps[j] < 0x80) tok += static_cast<char>(cps[j]);
      ++j;
    }
    if (detail::is_url_token(tok)) {
      for (std::size_t k = i; k < j; ++k) drop[k] = true;
    }
    i = j;
  }

  std::string text;
  text.reserve(raw.size());
  bool pending_space = false;
  bool any = false;
  auto push = [&](char c) {
    if (pending_space && any) text += ' ';
    pending_space = false;
    text += c;
    any = true;
  };
  for (std::size_t k = 0; k < cps.size(); ++k) {
    if (drop[k]) continue;
    char32_t cp = cps[k];
    if (detail::is_combining_mark(cp)) continue;
    bool emoticon = false;
    for (const auto& [lo, hi] : rules.emoticon_blocks) {
      if (cp >= lo && cp <= hi) {
        emoticon = true;
        break;
      }
    }
    if (emoticon) continue;
    if (const char base = detail::latin_base(cp)) {
      push(base);
      continue;
    }
    if (cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' || cp == U' ') {
      pending_space = true;
      continue;
    }
    if (cp >= 0x21 && cp <= 0x7E) {
      push(static_cast<char>(cp));
      continue;
    }
    // non-English / non-printable: dropped
  }

  std::size_t tokens = text.empty() ? 0 : 1;
  for (char c : text) {
    if (c == ' ') ++tokens;
  }
  CleanOutcome out;
  if (tokens < rules.min_tokens) {
    out.reject = RejectReason::Fragment;
    return out;
  }
  out.text = std::move(text);
  return out;
}

struct CleanReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t fragments = 0;

  nlohmann::json to_json() const {
    return {{"input", input}, {"kept", kept}, {"rejected", {{"fragment", fragments}}}};
  }
};

// Applies clean_record to every record, preserving order.
inline std::pair<std::vector<LabeledRecord>, CleanReport> clean_corpus(
    const std::vector<LabeledRecord>& records, const CleanRules& rules = {}) {
  std::vector<LabeledRecord> kept;
  kept.reserve(records.size());
  CleanReport report;
  report.input = records.size();
  for (const auto& rec : records) {
    CleanOutcome out = clean_record(rec.text, rules);
    if (!out.kept()) {
      ++report.fragments;
      continue;
    }
    kept.push_back(LabeledRecord{rec.id, std::move(out.text), rec.label});
  }
  report.kept = kept.size();
  return {std::move(kept), report};
}

// ---------------------------------------------------------------------------
// Synonym lexicon and augmentation

class SynonymLexicon {
public:
  SynonymLexicon() = default;

  void add(const std::string& word, std::vector<std::string> synonyms) {
    if (synonyms.empty()) throw DataError("lexicon: '" + word + "' has no synonyms");
    bool informative = false;
    for (const auto& s : synonyms) informative = informative || s != word;
    if (!informative) throw DataError("lexicon: '" + word + "' maps to itself only");
    entries_[word] = std::move(synonyms);
  }

  // Case-sensitive lookup with a case-folded fallback.
  const std::vector<std::string>* find(const std::string& word) const {
    auto it = entries_.find(word);
    if (it != entries_.end()) return &it->second;
    std::string folded = word;
    for (char& c : folded) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    it = entries_.find(folded);
    return it != entries_.end() ? &it->second : nullptr;
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  // word<TAB>syn1,syn2,... per line, UTF-8.
  static SynonymLexicon load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("lexicon: cannot open " + path);
    SynonymLexicon lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos || tab == 0) {
        throw DataError("lexicon: " + path + ":" + std::to_string(lineno) + ": expected word<TAB>synonyms");
      }
      std::vector<std::string> syns;
      std::string syn;
      std::stringstream ss(line.substr(tab + 1));
      while (std::getline(ss, syn, ',')) {
        if (!syn.empty()) syns.push_back(syn);
      }
      try {
        lex.add(line.substr(0, tab), std::move(syns));
      } catch (const DataError& e) {
        throw DataError("lexicon: " + path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return lex;
  }

private:
  std::map<std::string, std::vector<std::string>> entries_;
};

// Whitespace normalization, then seeded synonym replacement: every token
// with a lexicon entry is independently replaced with probability
// p_replace. The label never changes.
inline LabeledRecord augment(const LabeledRecord& record, const SynonymLexicon& lexicon,
                             double p_replace, std::uint64_t seed) {
  if (p_replace < 0.0 || p_replace > 1.0) {
    throw DataError("augment: p_replace must be in [0,1], got " + std::to_string(p_replace));
  }
  rng::Engine eng(rng::mix(seed, 0xa6));
  std::string out;
  out.reserve(record.text.size());
  std::size_t i = 0;
  const std::string& s = record.text;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    std::string tok = s.substr(i, j - i);
    if (const auto* syns = lexicon.find(tok)) {
      if (rng::unit(eng) < p_replace) {
        tok = (*syns)[static_cast<std::size_t>(rng::below(eng, syns->size()))];
      }
    }
    if (!out.empty()) out += ' ';
    out += tok;
    i = j;
  }
  return LabeledRecord{record.id, std::move(out), record.label};
}

// ---------------------------------------------------------------------------
// Stratified split

struct SplitResult {
  std::vector<LabeledRecord> train, validation, test;
  std::uint64_t seed = 0;
};

namespace detail {

// Largest-remainder apportionment of n into parts proportional to weights.
inline std::vector<std::size_t> largest_remainder(std::size_t n, const std::vector<std::size_t>& weights) {
  const double total_w = static_cast<double>(std::accumulate(weights.begin(), weights.end(), std::size_t{0}));
  std::vector<std::size_t> alloc(weights.size());
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double ideal = static_cast<double>(n) * static_cast<double>(weights[i]) / total_w;
    alloc[i] = static_cast<std::size_t>(ideal);
    remainder[i] = ideal - static_cast<double>(alloc[i]);
    assigned += alloc[i];
  }
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < weights.size(); ++i) {
      if (remainder[i] > remainder[best]) best = i;
    }
    ++alloc[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  return alloc;
}

// Apportions n1 into parts close to proportional while respecting
// per-subset bounds, so that subset totals land exactly on the global
// largest-remainder targets.
inline std::vector<std::size_t> bounded_remainder(std::size_t n1,
                                                  const std::vector<std::size_t>& weights,
                                                  const std::vector<std::size_t>& lo,
                                                  const std::vector<std::size_t>& hi) {
  const double total_w = static_cast<double>(std::accumulate(weights.begin(), weights.end(), std::size_t{0}));
  const std::size_t k = weights.size();
  std::vector<std::size_t> alloc(k);
  std::vector<double> ideal(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    ideal[i] = static_cast<double>(n1) * static_cast<double>(weights[i]) / total_w;
    alloc[i] = std::clamp(static_cast<std::size_t>(ideal[i]), lo[i], hi[i]);
    assigned += alloc[i];
  }
  while (assigned < n1) {
    // Give a seat to the most-underfilled subset with capacity left.
    std::size_t best = k;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      if (alloc[i] >= hi[i]) continue;
      const double gap = ideal[i] - static_cast<double>(alloc[i]);
      if (best == k || gap > best_gap) {
        best = i;
        best_gap = gap;
      }
    }
    if (best == k) throw DataError("stratified_split: infeasible allocation bounds");
    ++alloc[best];
    ++assigned;
  }
  while (assigned > n1) {
    // Take a seat from the most-overfilled subset above its floor.
    std::size_t best = k;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      if (alloc[i] <= lo[i]) continue;
      const double gap = static_cast<double>(alloc[i]) - ideal[i];
      if (best == k || gap > best_gap) {
        best = i;
        best_gap = gap;
      }
    }
    if (best == k) throw DataError("stratified_split: infeasible allocation bounds");
    --alloc[best];
    --assigned;
  }
  return alloc;
}

}  // namespace detail

// Per class: seeded shuffle, then largest-remainder allocation constrained
// so that subset totals match the global largest-remainder targets exactly.
inline SplitResult stratified_split(const std::vector<LabeledRecord>& records,
                                    std::vector<std::size_t> ratios, std::uint64_t seed) {
  if (ratios.size() != 3 || ratios[0] == 0 || ratios[1] == 0 || ratios[2] == 0) {
    throw DataError("stratified_split: ratios must be three positive integers");
  }
  std::vector<std::size_t> class_idx[2];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int y = records[i].label;
    if (y != 0 && y != 1) throw DataError("stratified_split: label must be 0 or 1 (record " + records[i].id + ")");
    class_idx[y].push_back(i);
  }
  for (int y = 0; y < 2; ++y) {
    if (class_idx[y].size() < 3) {
      throw DataError("stratified_split: class " + std::to_string(y) + " has " +
                      std::to_string(class_idx[y].size()) + " records; need at least 3");
    }
  }

  const std::size_t n0 = class_idx[0].size(), n1 = class_idx[1].size();
  const std::vector<std::size_t> target = detail::largest_remainder(n0 + n1, ratios);

  std::vector<std::size_t> lo(3), hi(3);
  for (std::size_t s = 0; s < 3; ++s) {
    lo[s] = target[s] > n0 ? target[s] - n0 : 0;
    hi[s] = std::min(target[s], n1);
  }
  const std::vector<std::size_t> alloc1 = detail::bounded_remainder(n1, ratios, lo, hi);
  std::vector<std::size_t> alloc0(3);
  for (std::size_t s = 0; s < 3; ++s) alloc0[s] = target[s] - alloc1[s];

  std::vector<std::size_t> subset_idx[3];
  for (int y = 0; y < 2; ++y) {
    auto& idx = class_idx[y];
    rng::Engine eng(rng::mix(seed, 0x51u + static_cast<std::uint64_t>(y)));
    rng::shuffle(idx, eng);
    const auto& alloc = (y == 1) ? alloc1 : alloc0;
    std::size_t at = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < alloc[s]; ++k) subset_idx[s].push_back(idx[at++]);
    }
  }
  SplitResult result;
  result.seed = seed;
  for (std::size_t s = 0; s < 3; ++s) {
    std::sort(subset_idx[s].begin(), subset_idx[s].end());  // original input order
    auto& subset = s == 0 ? result.train : (s == 1 ? result.validation : result.test);
    subset.reserve(subset_idx[s].size());
    for (std::size_t i : subset_idx[s]) subset.push_back(records[i]);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Corpus I/O

// RFC-4180-style CSV with header `text,class`; quoted fields may span
// lines and escape quotes by doubling. Class values: suicide / non-suicide.
inline std::vector<LabeledRecord> read_csv_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) content.erase(0, 3);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  std::size_t i = 0;
  auto end_field = [&]() {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&]() {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < content.size()) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      field += c;
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) {
          throw DataError("csv: " + path + ": stray quote in row " + std::to_string(rows.size() + 1));
        }
        in_quotes = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        if (i + 1 < content.size() && content[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_row();
        ++i;
        break;
      default:
        field += c;
        ++i;
    }
  }
  if (in_quotes) throw DataError("csv: " + path + ": unterminated quoted field");
  if (!field.empty() || !row.empty()) end_row();

  if (rows.empty()) throw DataError("csv: " + path + ": missing header");
  if (rows[0].size() != 2 || rows[0][0] != "text" || rows[0][1] != "class") {
    throw DataError("csv: " + path + ": header must be `text,class`");
  }
  std::vector<LabeledRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() == 1 && rows[r][0].empty()) continue;  // trailing blank line
    if (rows[r].size() != 2) {
      throw DataError("csv: " + path + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(rows[r].size()) + " fields, expected 2");
    }
    int label;
    if (rows[r][1] == "suicide") {
      label = 1;
    } else if (rows[r][1] == "non-suicide") {
      label = 0;
    } else {
      throw DataError("csv: " + path + ": row " + std::to_string(r + 1) +
                      ": class must be suicide or non-suicide, got '" + rows[r][1] + "'");
    }
    records.push_back(LabeledRecord{std::to_string(r), rows[r][0], label});
  }
  return records;
}

inline void write_csv_corpus(const std::string& path, const std::vector<LabeledRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("csv: cannot open " + path + " for writing");
  out << "text,class\n";
  for (const auto& rec : records) {
    const bool quote = rec.text.find_first_of(",\"\n\r") != std::string::npos;
    if (quote) {
      out << '"';
      for (char c : rec.text) {
        if (c == '"') out << "\"\"";
        else out << c;
      }
      out << '"';
    } else {
      out << rec.text;
    }
    out << ',' << (rec.label == 1 ? "suicide" : "non-suicide") << '\n';
  }
  if (!out) throw DataError("csv: write failed for " + path);
}

// JSON-lines: one {"id","text","label"} object per record.
inline void write_jsonl(const std::string& path, const std::vector<LabeledRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("jsonl: cannot open " + path + " for writing");
  for (const auto& rec : records) {
    nlohmann::json j{{"id", rec.id}, {"text", rec.text}, {"label", rec.label}};
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("jsonl: write failed for " + path);
}

inline std::vector<LabeledRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("jsonl: cannot open " + path);
  std::vector<LabeledRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("jsonl: " + path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("id") || !j.contains("text") || !j.contains("label")) {
      throw DataError("jsonl: " + path + ":" + std::to_string(lineno) + ": need id/text/label");
    }
    try {
      const int label = j["label"].get<int>();
      if (label != 0 && label != 1) {
        throw DataError("jsonl: " + path + ":" + std::to_string(lineno) + ": label must be 0 or 1");
      }
      records.push_back(LabeledRecord{j["id"].get<std::string>(), j["text"].get<std::string>(), label});
    } catch (const nlohmann::json::exception& e) {
      throw DataError("jsonl: " + path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace sce
