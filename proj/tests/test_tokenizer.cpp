#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sce/tokenizer.hpp"

using namespace sce;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sce-tokenizer-tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string random_ascii(rng::Engine& eng, std::size_t max_len) {
  const std::size_t n = rng::below(eng, max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    s += static_cast<char>(0x20 + rng::below(eng, 95));
  }
  return s;
}

}  // namespace

TEST_CASE("bpe hand trace on a tiny corpus", "[tokenizer]") {
  // alphabet {a,b} + 4 specials = 6; budget for exactly one merge
  Vocabulary v = Vocabulary::train({"aaab", "aaab"}, 7);
  REQUIRE(v.size() == 7);
  REQUIRE(v.num_merges() == 1);
  REQUIRE(v.token(v.merges()[0].first) == "a");
  REQUIRE(v.token(v.merges()[0].second) == "a");
  REQUIRE(v.token(6) == "aa");
}

TEST_CASE("bpe with no merge budget yields a pure character vocab", "[tokenizer]") {
  Vocabulary v = Vocabulary::train({"abcabc"}, 4 + 3);
  REQUIRE(v.size() == 7);
  REQUIRE(v.num_merges() == 0);
}

TEST_CASE("bpe training is deterministic", "[tokenizer]") {
  const std::vector<std::string> corpus = {"the cat sat on the mat", "the dog sat on the log",
                                           "cats and dogs", "mats and logs"};
  Vocabulary a = Vocabulary::train(corpus, 40);
  Vocabulary b = Vocabulary::train(corpus, 40);
  REQUIRE(a == b);
  REQUIRE(a.num_merges() > 0);
}

TEST_CASE("bpe rejects bad inputs", "[tokenizer]") {
  REQUIRE_THROWS_AS(Vocabulary::train({}, 100), DataError);
  REQUIRE_THROWS_AS(Vocabulary::train({"abc"}, 6), DataError);  // 4 + 3 > 6
}

TEST_CASE("encode frames with BOS/EOS and pads to max_len", "[tokenizer]") {
  Vocabulary v = Vocabulary::train({"hello world"}, 30);

  const EncodedSequence empty = v.encode("", 8);
  REQUIRE(empty.ids.size() == 8);
  REQUIRE(empty.ids[0] == special::BOS);
  REQUIRE(empty.ids[1] == special::EOS);
  for (std::size_t i = 2; i < 8; ++i) REQUIRE(empty.ids[i] == special::PAD);
  REQUIRE(empty.true_length == 2);

  const EncodedSequence some = v.encode("hello", 64);
  REQUIRE(some.ids.size() == 64);
  REQUIRE(some.ids[0] == special::BOS);
  REQUIRE(some.ids[some.true_length - 1] == special::EOS);

  REQUIRE_THROWS_AS(v.encode("hello", 2), DataError);
}

TEST_CASE("long text truncates with EOS in the final kept position", "[tokenizer]") {
  Vocabulary v = Vocabulary::train({"abcdefgh"}, 12);
  std::string lots;
  for (int i = 0; i < 600; ++i) lots += "abcdefgh";
  const EncodedSequence seq = v.encode(lots, 256);
  REQUIRE(seq.ids.size() == 256);
  REQUIRE(seq.true_length == 256);
  REQUIRE(seq.ids[0] == special::BOS);
  REQUIRE(seq.ids[255] == special::EOS);
  for (std::size_t i = 1; i < 255; ++i) REQUIRE(seq.ids[i] != special::PAD);
}

TEST_CASE("encode output length is exactly max_len for random strings", "[tokenizer]") {
  Vocabulary v = Vocabulary::train({"the quick brown fox jumps over the lazy dog 0123456789"}, 80);
  rng::Engine eng(rng::mix(97, 0));
  for (int trial = 0; trial < 200; ++trial) {
    const std::string s = random_ascii(eng, 120);
    const std::size_t max_len = 3 + rng::below(eng, 40);
    const EncodedSequence seq = v.encode(s, max_len);
    REQUIRE(seq.ids.size() == max_len);
    REQUIRE(seq.ids[0] == special::BOS);
    REQUIRE(seq.true_length >= 2);
    REQUIRE(seq.true_length <= max_len);
    REQUIRE(seq.ids[seq.true_length - 1] == special::EOS);
    for (std::size_t i = seq.true_length; i < max_len; ++i) REQUIRE(seq.ids[i] == special::PAD);
  }
}

TEST_CASE("decode inverts encode for in-alphabet text under max_len", "[tokenizer]") {
  const std::vector<std::string> corpus = {"it was the best of times it was the worst of times"};
  Vocabulary v = Vocabulary::train(corpus, 60);
  rng::Engine eng(rng::mix(98, 0));
  const std::string alphabet = "itwashebofmr ";
  for (int trial = 0; trial < 100; ++trial) {
    std::string s;
    const std::size_t n = rng::below(eng, 30);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng::below(eng, alphabet.size())];
    const EncodedSequence seq = v.encode(s, 64);
    REQUIRE(v.decode(seq.ids) == s);
  }
  REQUIRE(v.decode(std::vector<std::int32_t>{special::BOS, special::EOS}) == "");
}

TEST_CASE("unknown bytes become UNK and vanish on decode", "[tokenizer]") {
  Vocabulary v = Vocabulary::train({"abc"}, 10);
  const EncodedSequence seq = v.encode("aXbYc", 16);
  REQUIRE(v.decode(seq.ids) == "abc");
  bool has_unk = false;
  for (auto id : seq.ids) has_unk = has_unk || id == special::UNK;
  REQUIRE(has_unk);
}

TEST_CASE("vocabulary save/load round-trips exactly", "[tokenizer]") {
  const std::vector<std::string> corpus = {"pack my box with five dozen liquor jugs",
                                           "pack my box again and again"};
  Vocabulary v = Vocabulary::train(corpus, 50);
  const fs::path path = temp_file("vocab_roundtrip.txt");
  v.save(path.string());
  Vocabulary loaded = Vocabulary::load(path.string());
  REQUIRE(loaded == v);

  const EncodedSequence a = v.encode("pack my jugs", 32);
  const EncodedSequence b = loaded.encode("pack my jugs", 32);
  REQUIRE(a.ids == b.ids);

  // byte-exact file round-trip
  loaded.save((path.parent_path() / "vocab_roundtrip2.txt").string());
  std::ifstream f1(path, std::ios::binary), f2(path.parent_path() / "vocab_roundtrip2.txt", std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  REQUIRE(s1 == s2);
}

TEST_CASE("vocabulary files with odd bytes still round-trip", "[tokenizer]") {
  Vocabulary v = Vocabulary::train({"a\tb\nc\\d a\tb\nc\\d"}, 16);
  const fs::path path = temp_file("vocab_escapes.txt");
  v.save(path.string());
  Vocabulary loaded = Vocabulary::load(path.string());
  REQUIRE(loaded == v);
  const EncodedSequence seq = loaded.encode("a\tb", 8);
  REQUIRE(loaded.decode(seq.ids) == "a\tb");
}

TEST_CASE("malformed vocab files report the line number", "[tokenizer]") {
  const fs::path path = temp_file("vocab_bad.txt");
  {
    std::ofstream out(path);
    out << "bpe-vocab v1\n0\t<pad>\n1\t<s>\n2\t</s>\n3\t<unk>\nnot-a-row\n";
  }
  REQUIRE_THROWS_MATCHES(Vocabulary::load(path.string()), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":6:")));

  {
    std::ofstream out(path);
    out << "something else\n";
  }
  REQUIRE_THROWS_MATCHES(Vocabulary::load(path.string()), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(":1:")));

  {
    std::ofstream out(path);
    out << "bpe-vocab v1\n0\t<pad>\n1\t<s>\n2\t</s>\n3\t<unk>\n4\ta\n";
  }
  REQUIRE_THROWS_MATCHES(Vocabulary::load(path.string()), DataError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("#merges")));
}

TEST_CASE("merges never produce special-token strings", "[tokenizer]") {
  // "<s>" appears often enough that (<, s>) or (<s, >) would otherwise win
  std::vector<std::string> corpus(8, "<s> <s> <s> <s>");
  Vocabulary v = Vocabulary::train(corpus, 40);
  for (std::size_t id = special::COUNT; id < v.size(); ++id) {
    for (std::size_t k = 0; k < special::COUNT; ++k) {
      REQUIRE(v.token(static_cast<std::int32_t>(id)) != special::name(static_cast<std::int32_t>(k)));
    }
  }
  // round-trip still works
  const EncodedSequence seq = v.encode("<s> <s>", 32);
  REQUIRE(v.decode(seq.ids) == "<s> <s>");
}
