#pragma once

// Seeded toy corpus for end-to-end smoke and convergence runs: balanced
// binary posts built from shared filler vocabulary, where positive posts
// additionally embed a few tokens from a small distress lexicon.

#include <cstdint>
#include <string>
#include <vector>

#include "sce/common.hpp"
#include "sce/data.hpp"

namespace sce {

struct ToyCorpusOptions {
  std::size_t n_posts = 2000;
  std::uint64_t seed = 7;
  std::size_t min_words = 8;
  std::size_t max_words = 20;
};

inline const std::vector<std::string>& toy_filler_words() {
  static const std::vector<std::string> words = {
      "the",     "a",       "my",       "today",   "i",        "went",    "to",
      "work",    "school",  "again",    "and",     "then",     "we",      "had",
      "coffee",  "dinner",  "with",     "friends", "watched",  "a",       "movie",
      "about",   "music",   "games",    "books",   "weather",  "was",     "nice",
      "raining", "sunny",   "later",    "played",  "guitar",   "cooked",  "pasta",
      "talked",  "called",  "mom",      "brother", "weekend",  "plans",   "maybe",
      "hiking",  "running", "practice", "team",    "project",  "finished", "started",
      "reading", "new",     "show",     "really",  "pretty",   "good",    "fun",
      "long",    "day",     "week",     "morning", "evening",  "slept",   "early",
      "late",    "bus",     "train",    "store",   "bought",   "groceries"};
  return words;
}

inline const std::vector<std::string>& toy_distress_words() {
  static const std::vector<std::string> words = {
      "hopeless", "worthless", "unbearable", "exhausted", "trapped",
      "numb",     "pointless", "drowning",   "burden",    "goodbye",
      "empty",    "broken",    "alone",      "darkness"};
  return words;
}

// Balanced corpus: even ids are class 0 (filler only), odd ids are class 1
// (filler plus 2-3 distress tokens at random positions). Deterministic
// given the options.
inline std::vector<LabeledRecord> make_toy_corpus(const ToyCorpusOptions& opts = {}) {
  if (opts.n_posts < 2) throw DataError("toy corpus: need at least 2 posts");
  if (opts.min_words < 3 || opts.max_words < opts.min_words) {
    throw DataError("toy corpus: bad word-count range");
  }
  const auto& filler = toy_filler_words();
  const auto& distress = toy_distress_words();

  std::vector<LabeledRecord> records;
  records.reserve(opts.n_posts);
  for (std::size_t i = 0; i < opts.n_posts; ++i) {
    rng::Engine eng(rng::mix(opts.seed, 0x70000 + i));
    const int label = static_cast<int>(i % 2);
    const std::size_t n_words =
        opts.min_words + static_cast<std::size_t>(rng::below(eng, opts.max_words - opts.min_words + 1));
    std::vector<std::string> words;
    words.reserve(n_words + 3);
    for (std::size_t w = 0; w < n_words; ++w) {
      words.push_back(filler[static_cast<std::size_t>(rng::below(eng, filler.size()))]);
    }
    if (label == 1) {
      const std::size_t n_distress = 2 + static_cast<std::size_t>(rng::below(eng, 2));
      for (std::size_t k = 0; k < n_distress; ++k) {
        const auto& word = distress[static_cast<std::size_t>(rng::below(eng, distress.size()))];
        const std::size_t pos = static_cast<std::size_t>(rng::below(eng, words.size() + 1));
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), word);
      }
    }
    std::string text;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w) text += ' ';
      text += words[w];
    }
    records.push_back(LabeledRecord{std::to_string(i + 1), std::move(text), label});
  }
  return records;
}

}  // namespace sce
