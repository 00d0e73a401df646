#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "sce/data.hpp"
#include "sce/synthetic.hpp"

using namespace sce;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sce-data-tests";
  fs::create_directories(dir);
  return dir / name;
}

// Random noisy strings: valid UTF-8 drawn from ASCII, accents, emoji,
// URLs, and assorted whitespace.
std::string noisy_string(rng::Engine& eng) {
  static const std::vector<std::string> chunks = {
      "hello",  "world",  "café",   "naïve", "救命",       "😀",   "🙏",
      "https://example.com/x?y=1",  "www.reddit.com/r/all", "\t",  "\n",
      "  ",     "...",    "don't",  "UPPER", "mixedCase",  "é",    "ß",
      "token",  "—",      "½",      "a",     "I",          "feel", "ok"};
  std::string s;
  const std::size_t n = rng::below(eng, 12);
  for (std::size_t i = 0; i < n; ++i) {
    s += chunks[rng::below(eng, chunks.size())];
    if (rng::below(eng, 2)) s += ' ';
  }
  return s;
}

}  // namespace

TEST_CASE("clean_record rule traces", "[data]") {
  // URL and emoji stripped; two tokens survive -> fragment
  const CleanOutcome a = clean_record("Check https://x.co now \xF0\x9F\x98\x80");
  REQUIRE_FALSE(a.kept());
  REQUIRE(a.reject == RejectReason::Fragment);

  const CleanOutcome b = clean_record("I feel bad. I just wanna stop existing.");
  REQUIRE(b.kept());
  REQUIRE(b.text == "I feel bad. I just wanna stop existing.");

  const CleanOutcome c = clean_record("my caf\xC3\xA9 visit");
  REQUIRE(c.kept());
  REQUIRE(c.text == "my cafe visit");

  // case, punctuation, and stop-words are preserved
  const CleanOutcome d = clean_record("The THE the... And?  Stop-words stay!");
  REQUIRE(d.kept());
  REQUIRE(d.text == "The THE the... And? Stop-words stay!");
}

TEST_CASE("clean_record URL and www variants", "[data]") {
  REQUIRE(clean_record("go to http://a.b now please").text == "go to now please");
  REQUIRE(clean_record("see www.reddit.com/r/x for more info").text == "see for more info");
  REQUIRE(clean_record("ftp://files.example.org has the file here").text == "has the file here");
  // not a URL: keep
  REQUIRE(clean_record("wwwish words are fine here").text == "wwwish words are fine here");
}

TEST_CASE("clean_record accents and non-English text", "[data]") {
  REQUIRE(clean_record("r\xC3\xA9sum\xC3\xA9 review goes well").text == "resume review goes well");
  // combining mark form: e + U+0301
  REQUIRE(clean_record("cafe\xCC\x81 time is good").text == "cafe time is good");
  // non-Latin content drops entirely
  const CleanOutcome k = clean_record("\xE6\x95\x91\xE5\x91\xBD only ascii stays");
  REQUIRE(k.kept());
  REQUIRE(k.text == "only ascii stays");
}

TEST_CASE("clean_record rejects invalid UTF-8", "[data]") {
  REQUIRE_THROWS_AS(clean_record("abc\xFF def"), DataError);
  REQUIRE_THROWS_AS(clean_record("trunc \xE2\x82"), DataError);
}

TEST_CASE("clean_record is idempotent and ASCII-only", "[data]") {
  rng::Engine eng(rng::mix(2024, 0));
  std::size_t kept_count = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string raw = noisy_string(eng);
    const CleanOutcome once = clean_record(raw);
    if (!once.kept()) continue;
    ++kept_count;
    for (unsigned char ch : once.text) {
      REQUIRE(ch >= 0x20);
      REQUIRE(ch <= 0x7E);
    }
    const CleanOutcome twice = clean_record(once.text);
    REQUIRE(twice.kept());
    REQUIRE(twice.text == once.text);
  }
  REQUIRE(kept_count > 50);  // generator produces plenty of keepable strings
}

TEST_CASE("clean_corpus composition and fixpoint", "[data]") {
  std::vector<LabeledRecord> recs = {
      {"1", "Check https://x.co now \xF0\x9F\x98\x80", 0},
      {"2", "I feel bad. I just wanna stop existing.", 1},
      {"3", "my caf\xC3\xA9 visit was nice", 0},
  };
  auto [kept, report] = clean_corpus(recs);
  REQUIRE(kept.size() == 2);
  REQUIRE(report.input == 3);
  REQUIRE(report.kept == 2);
  REQUIRE(report.fragments == 1);
  REQUIRE(kept[0].id == "2");
  REQUIRE(kept[1].id == "3");

  auto [again, report2] = clean_corpus(kept);
  REQUIRE(report2.fragments == 0);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    REQUIRE(again[i].text == kept[i].text);
    REQUIRE(again[i].label == kept[i].label);
  }

  auto [none, empty_report] = clean_corpus({});
  REQUIRE(none.empty());
  REQUIRE(empty_report.input == 0);
  REQUIRE(empty_report.fragments == 0);
}

TEST_CASE("augment normalization and replacement", "[data]") {
  SynonymLexicon lex;
  lex.add("sad", {"unhappy"});
  lex.add("tired", {"weary", "drained"});

  const LabeledRecord rec{"1", "  so   sad  today ", 1};
  const LabeledRecord plain = augment(rec, lex, 0.0, 5);
  REQUIRE(plain.text == "so sad today");
  REQUIRE(plain.label == 1);

  const LabeledRecord forced = augment({"1", "so sad", 1}, lex, 1.0, 5);
  REQUIRE(forced.text == "so unhappy");

  const LabeledRecord a = augment(rec, lex, 0.5, 42);
  const LabeledRecord b = augment(rec, lex, 0.5, 42);
  REQUIRE(a.text == b.text);

  // tokens absent from the lexicon are never touched; label never changes
  rng::Engine eng(rng::mix(7, 0));
  for (int trial = 0; trial < 50; ++trial) {
    const LabeledRecord out = augment({"x", "alpha tired beta sad gamma", 0}, lex, 1.0, trial);
    REQUIRE(out.label == 0);
    REQUIRE(out.text.find("alpha") != std::string::npos);
    REQUIRE(out.text.find("beta") != std::string::npos);
    REQUIRE(out.text.find("gamma") != std::string::npos);
    REQUIRE(out.text.find("sad") == std::string::npos);
    REQUIRE(out.text.find("tired") == std::string::npos);
  }

  // case-folded fallback
  const LabeledRecord folded = augment({"1", "SAD news", 1}, lex, 1.0, 9);
  REQUIRE(folded.text == "unhappy news");

  REQUIRE_THROWS_AS(augment(rec, lex, 1.5, 0), DataError);
  SynonymLexicon self;
  REQUIRE_THROWS_AS(self.add("loop", {"loop"}), DataError);
}

TEST_CASE("lexicon file parsing", "[data]") {
  const fs::path path = temp_file("lex.tsv");
  {
    std::ofstream out(path);
    out << "# comment\nsad\tunhappy,down\nbad\tawful\n";
  }
  const SynonymLexicon lex = SynonymLexicon::load(path.string());
  REQUIRE(lex.size() == 2);
  REQUIRE(lex.find("sad") != nullptr);
  REQUIRE(lex.find("sad")->size() == 2);

  {
    std::ofstream out(path);
    out << "sad no-tab-here\n";
  }
  REQUIRE_THROWS_MATCHES(SynonymLexicon::load(path.string()), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":1:")));
}

TEST_CASE("stratified split reproduces the published subset sizes", "[data][split]") {
  // 110,040 records, 35,270 positive
  std::vector<LabeledRecord> recs;
  recs.reserve(110040);
  for (std::size_t i = 0; i < 110040; ++i) {
    recs.push_back({std::to_string(i), "text", i < 35270 ? 1 : 0});
  }
  const SplitResult split = stratified_split(recs, {8, 1, 1}, 33);
  REQUIRE(split.train.size() == 88032);
  REQUIRE(split.validation.size() == 11004);
  REQUIRE(split.test.size() == 11004);

  auto positive_share = [](const std::vector<LabeledRecord>& v) {
    std::size_t pos = 0;
    for (const auto& r : v) pos += static_cast<std::size_t>(r.label);
    return static_cast<double>(pos) / static_cast<double>(v.size());
  };
  const double global = 35270.0 / 110040.0;
  REQUIRE(std::abs(positive_share(split.train) - global) < 0.001);
  REQUIRE(std::abs(positive_share(split.validation) - global) < 0.001);
  REQUIRE(std::abs(positive_share(split.test) - global) < 0.001);
}

TEST_CASE("tiny 10-record split lands 8/1/1 with both classes trained", "[data][split]") {
  std::vector<LabeledRecord> recs;
  for (std::size_t i = 0; i < 10; ++i) recs.push_back({std::to_string(i), "t", i < 5 ? 1 : 0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SplitResult s = stratified_split(recs, {8, 1, 1}, seed);
    REQUIRE(s.train.size() == 8);
    REQUIRE(s.validation.size() == 1);
    REQUIRE(s.test.size() == 1);
    std::size_t pos = 0;
    for (const auto& r : s.train) pos += static_cast<std::size_t>(r.label);
    REQUIRE(pos == 4);  // both classes represented, proportionally
  }
}

TEST_CASE("split subsets are disjoint, exhaustive, and size-exact", "[data][split]") {
  rng::Engine eng(rng::mix(55, 0));
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 10 + rng::below(eng, 9991);
    // skew from balanced to heavily negative, keeping >= 3 per class
    const std::size_t n_pos = 3 + rng::below(eng, n - 6);
    std::vector<LabeledRecord> recs;
    recs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      recs.push_back({std::to_string(i), "t", i < n_pos ? 1 : 0});
    }
    const SplitResult s = stratified_split(recs, {8, 1, 1}, trial);

    // exact global largest-remainder sizes
    const auto target = detail::largest_remainder(n, {8, 1, 1});
    REQUIRE(s.train.size() == target[0]);
    REQUIRE(s.validation.size() == target[1]);
    REQUIRE(s.test.size() == target[2]);

    std::set<std::string> seen;
    for (const auto* subset : {&s.train, &s.validation, &s.test}) {
      for (const auto& r : *subset) REQUIRE(seen.insert(r.id).second);
    }
    REQUIRE(seen.size() == n);
  }
}

TEST_CASE("split determinism and error cases", "[data][split]") {
  std::vector<LabeledRecord> recs;
  for (std::size_t i = 0; i < 100; ++i) recs.push_back({std::to_string(i), "t", i % 3 == 0 ? 1 : 0});
  const SplitResult a = stratified_split(recs, {8, 1, 1}, 9);
  const SplitResult b = stratified_split(recs, {8, 1, 1}, 9);
  for (std::size_t i = 0; i < a.train.size(); ++i) REQUIRE(a.train[i].id == b.train[i].id);

  std::vector<LabeledRecord> skew = {{"1", "t", 1}, {"2", "t", 0}, {"3", "t", 0}, {"4", "t", 0}};
  REQUIRE_THROWS_AS(stratified_split(skew, {8, 1, 1}, 0), DataError);
}

TEST_CASE("csv round-trip with quoted multiline text", "[data]") {
  const fs::path path = temp_file("corpus.csv");
  std::vector<LabeledRecord> recs = {
      {"1", "plain words here", 0},
      {"2", "comma, inside", 1},
      {"3", "a \"quoted\" bit", 0},
      {"4", "line one\nline two", 1},
  };
  write_csv_corpus(path.string(), recs);
  const auto loaded = read_csv_corpus(path.string());
  REQUIRE(loaded.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(loaded[i].text == recs[i].text);
    REQUIRE(loaded[i].label == recs[i].label);
  }
}

TEST_CASE("csv rejects malformed inputs with row numbers", "[data]") {
  const fs::path path = temp_file("bad.csv");
  {
    std::ofstream out(path);
    out << "text,class\nhello there,maybe\n";
  }
  REQUIRE_THROWS_MATCHES(read_csv_corpus(path.string()), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("row 2")));
  {
    std::ofstream out(path);
    out << "wrong,header\n";
  }
  REQUIRE_THROWS_AS(read_csv_corpus(path.string()), DataError);
  REQUIRE_THROWS_AS(read_csv_corpus("/nonexistent/x.csv"), DataError);
}

TEST_CASE("jsonl round-trip and validation", "[data]") {
  const fs::path path = temp_file("corpus.jsonl");
  std::vector<LabeledRecord> recs = {
      {"a", "some text", 1},
      {"b", "with \"quotes\" and \\ slashes", 0},
  };
  write_jsonl(path.string(), recs);
  const auto loaded = read_jsonl(path.string());
  REQUIRE(loaded.size() == 2);
  REQUIRE(loaded[0].id == "a");
  REQUIRE(loaded[1].text == recs[1].text);

  {
    std::ofstream out(path);
    out << "{\"id\":\"x\",\"text\":\"y\",\"label\":3}\n";
  }
  REQUIRE_THROWS_MATCHES(read_jsonl(path.string()), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":1:")));
  {
    std::ofstream out(path);
    out << "not json\n";
  }
  REQUIRE_THROWS_AS(read_jsonl(path.string()), DataError);
}

TEST_CASE("toy corpus is balanced, deterministic, and clean", "[data]") {
  const auto recs = make_toy_corpus({.n_posts = 200, .seed = 3});
  REQUIRE(recs.size() == 200);
  std::size_t pos = 0;
  for (const auto& r : recs) pos += static_cast<std::size_t>(r.label);
  REQUIRE(pos == 100);

  const auto again = make_toy_corpus({.n_posts = 200, .seed = 3});
  for (std::size_t i = 0; i < recs.size(); ++i) REQUIRE(recs[i].text == again[i].text);

  // survives cleaning untouched
  auto [kept, report] = clean_corpus(recs);
  REQUIRE(report.fragments == 0);
  for (std::size_t i = 0; i < recs.size(); ++i) REQUIRE(kept[i].text == recs[i].text);

  // distress tokens appear only in positive posts
  for (const auto& r : recs) {
    bool has_distress = false;
    for (const auto& w : toy_distress_words()) {
      if (r.text.find(w) != std::string::npos) has_distress = true;
    }
    if (r.label == 1) REQUIRE(has_distress);
    else REQUIRE_FALSE(has_distress);
  }
}
