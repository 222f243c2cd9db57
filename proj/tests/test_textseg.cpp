#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "keystage/rng.hpp"
#include "keystage/textseg.hpp"

using namespace keystage;
using namespace keystage::textseg;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

// A sentence of exactly `n` budget tokens: n-1 words and a full stop.
std::string sentence_of(std::size_t n) {
  std::string s = "Word";
  for (std::size_t i = 1; i + 1 < n; ++i) s += " word";
  return s + ".";
}

const std::vector<std::string> kVocab = {"the", "old", "river", "ran", "past", "houses",
                                         "quietly", "and", "children", "watched", "boats",
                                         "beautiful", "strengths", "don't", "well-known"};

std::string capitalise(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 32);
  return w;
}

std::string random_sentence(Rng& rng) {
  const std::size_t len = 1 + rng.uniform_index(25);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    std::string w = kVocab[rng.uniform_index(kVocab.size())];
    if (i == 0) w = capitalise(w);
    if (i > 0) s += rng.uniform01() < 0.1 ? ", " : " ";
    s += w;
  }
  static const char* enders[] = {".", "!", "?", "?!", "...\"", "."};
  return s + enders[rng.uniform_index(6)];
}

std::string random_document(Rng& rng, std::size_t sentences) {
  std::string doc;
  for (std::size_t i = 0; i < sentences; ++i) {
    if (i > 0) doc += rng.uniform01() < 0.15 ? "\n\n" : (rng.uniform01() < 0.2 ? "\n" : " ");
    doc += random_sentence(rng);
  }
  if (rng.uniform01() < 0.5) doc += "\n";
  return doc;
}

void check_structure(const SegmentedText& seg) {
  std::size_t expect = 0;
  for (const auto& s : seg.sentences) {
    CHECK(s.begin == expect);
    CHECK(s.end > s.begin);
    expect = s.end;
  }
  CHECK(expect == seg.tokens.size());
  expect = 0;
  for (const auto& p : seg.paragraphs) {
    CHECK(p.begin == expect);
    CHECK(p.end > p.begin);
    expect = p.end;
  }
  CHECK(expect == seg.sentences.size());
}

}  // namespace

TEST_CASE("tokenize: empty input") { CHECK(tokenize("").empty()); }

TEST_CASE("tokenize: words and punctuation") {
  const auto tokens = tokenize("The cat sat.");
  REQUIRE(tokens.size() == 4);
  CHECK(surfaces(tokens) == std::vector<std::string>{"The", "cat", "sat", "."});
  CHECK(tokens[0].is_word());
  CHECK(tokens[2].is_word());
  CHECK(tokens[3].is_punct());
  CHECK(tokens[3].syllables == 0);
  CHECK(tokens[1].char_count == 3);
}

TEST_CASE("tokenize: internal apostrophes and hyphens stay in the word") {
  const auto tokens = tokenize("don't stop");
  CHECK(surfaces(tokens) == std::vector<std::string>{"don't", "stop"});
  CHECK(tokens[0].char_count == 4);

  const auto hy = tokenize("a well-known 'quote' - end");
  CHECK(surfaces(hy) ==
        std::vector<std::string>{"a", "well-known", "'", "quote", "'", "-", "end"});
}

TEST_CASE("tokenize: offsets reproduce the input with whitespace gaps") {
  const std::string text = "  “Hello,” said Mr. Brown…\n\n It’s 3.5 km — isn’t it?  ";
  const auto tokens = tokenize(text);
  std::size_t pos = 0;
  std::string rebuilt;
  for (const auto& t : tokens) {
    const std::string gap = text.substr(pos, t.begin - pos);
    for (char c : gap) CHECK((c == ' ' || c == '\n' || c == '\t' || c == '\r'));
    CHECK(text.substr(t.begin, t.end - t.begin) == t.surface);
    rebuilt += gap + t.surface;
    pos = t.end;
  }
  rebuilt += text.substr(pos);
  CHECK(rebuilt == text);
}

TEST_CASE("tokenize: token invariants") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    for (const auto& t : tokenize(random_document(rng, 8))) {
      if (t.is_word()) {
        CHECK(t.char_count >= 1);
        CHECK(t.syllables >= 1);
      } else {
        CHECK(t.syllables == 0);
      }
    }
  }
}

TEST_CASE("split_sentences: spec examples") {
  CHECK(split_sentences(tokenize("Hi. Bye.")).size() == 2);
  CHECK(split_sentences(tokenize("no terminator here")).size() == 1);
  const auto quoted = tokenize("He said \"Stop!\" Then ran.");
  const auto s = split_sentences(quoted);
  REQUIRE(s.size() == 2);
  CHECK(quoted[s[0].end - 1].surface == "\"");
}

TEST_CASE("split_sentences: abbreviation, initial and decimal guards") {
  CHECK(split_sentences(tokenize("Mr. Smith went home. He slept.")).size() == 2);
  CHECK(split_sentences(tokenize("It cost 3.50 today. Fine.")).size() == 2);
  CHECK(split_sentences(tokenize("J. R. Hartley wrote it. Yes.")).size() == 2);
  CHECK(split_sentences(tokenize("Wait... and then nothing. Done.")).size() == 2);
  CHECK(split_sentences(tokenize("What?! No way.")).size() == 2);
  CHECK(split_sentences(tokenize("I went. I saw.")).size() == 2);
}

TEST_CASE("split_sentences: blank line forces a break") {
  CHECK(split_sentences(tokenize("A heading\n\nBody text here.")).size() == 2);
}

TEST_CASE("count_syllables") {
  CHECK(count_syllables("cat") == 1);
  CHECK(count_syllables("beautiful") == 3);
  CHECK(count_syllables("strengths") == 1);
  CHECK(count_syllables("make") == 1);
  CHECK(count_syllables("table") == 2);
  CHECK(count_syllables("the") == 1);
  CHECK(count_syllables("well-known") == 2);
  CHECK(count_syllables("rhythm") == 1);
  CHECK(count_syllables("hmm") == 1);
}

TEST_CASE("count_syllables: floor of one for arbitrary words") {
  Rng rng(3);
  const std::string letters = "abcdefghijklmnopqrstuvwxyz";
  for (int i = 0; i < 2000; ++i) {
    std::string w;
    const std::size_t len = 1 + rng.uniform_index(12);
    for (std::size_t k = 0; k < len; ++k) w += letters[rng.uniform_index(26)];
    CHECK(count_syllables(w) >= 1);
  }
}

TEST_CASE("segment: paragraphs are blank-line blocks") {
  const auto seg = segment("One. Two.\n\nThree.\nFour.\n\n\nFive.");
  CHECK(seg.sentences.size() == 5);
  REQUIRE(seg.paragraphs.size() == 3);
  CHECK(seg.paragraphs[0] == Range{0, 2});
  CHECK(seg.paragraphs[1] == Range{2, 4});
  CHECK(seg.paragraphs[2] == Range{4, 5});
  check_structure(seg);
}

TEST_CASE("chunk_document: spec examples") {
  SUBCASE("empty text") { CHECK(chunk_document("").empty()); }
  SUBCASE("two 300-token sentences") {
    const auto chunks = chunk_document(sentence_of(300) + " " + sentence_of(300), 512);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].segmented.sentences.size() == 1);
    CHECK(chunks[1].segmented.sentences.size() == 1);
    CHECK_FALSE(chunks[0].oversized);
  }
  SUBCASE("one 600-token sentence") {
    const auto chunks = chunk_document(sentence_of(600), 512);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].oversized);
  }
  SUBCASE("five 100-token sentences") {
    std::string doc;
    for (int i = 0; i < 5; ++i) doc += sentence_of(100) + " ";
    const auto chunks = chunk_document(doc, 512);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].segmented.sentences.size() == 5);
  }
  SUBCASE("budget is respected exactly at the edge") {
    const auto chunks = chunk_document(sentence_of(256) + " " + sentence_of(256), 512);
    CHECK(chunks.size() == 1);
    const auto over = chunk_document(sentence_of(256) + " " + sentence_of(257), 512);
    CHECK(over.size() == 2);
  }
}

TEST_CASE("chunk_document: round trip, budget and structure on random documents") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string doc = random_document(rng, 1 + rng.uniform_index(40));
    const std::size_t budget = 1 + rng.uniform_index(80);
    const auto chunks = chunk_document(doc, budget);
    std::string joined;
    std::size_t expect_begin = 0;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto& c = chunks[i];
      CHECK(c.index == i);
      CHECK(c.segmented.source_span.begin == expect_begin);
      CHECK(c.segmented.source_span.begin < c.segmented.source_span.end);
      expect_begin = c.segmented.source_span.end;
      joined += c.text;
      check_structure(c.segmented);
      std::size_t tokens = 0;
      for (const auto& s : c.segmented.sentences) tokens += budget_tokens(c.segmented, s);
      if (c.segmented.sentences.size() > 1) CHECK(tokens <= budget);
      if (tokens > budget) CHECK(c.oversized);
    }
    CHECK(joined == doc);
  }
}

TEST_CASE("chunk_document: appending a sentence keeps earlier chunks") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string doc = random_document(rng, 2 + rng.uniform_index(30));
    const std::string longer = doc + " " + random_sentence(rng);
    const std::size_t budget = 5 + rng.uniform_index(60);
    const auto a = chunk_document(doc, budget);
    const auto b = chunk_document(longer, budget);
    REQUIRE(b.size() >= a.size());
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
      CHECK(a[i].text == b[i].text);
      CHECK(a[i].segmented.sentences == b[i].segmented.sentences);
      CHECK(a[i].segmented.paragraphs == b[i].segmented.paragraphs);
    }
  }
}

TEST_CASE("segment: deterministic across threads") {
  Rng rng(5);
  const std::string doc = random_document(rng, 200);
  const auto reference = chunk_document(doc, 64);
  std::vector<std::thread> threads;
  std::vector<int> ok(4, 0);
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      const auto mine = chunk_document(doc, 64);
      bool same = mine.size() == reference.size();
      for (std::size_t i = 0; same && i < mine.size(); ++i) {
        same = mine[i].text == reference[i].text &&
               mine[i].segmented.sentences == reference[i].segmented.sentences;
      }
      ok[static_cast<std::size_t>(t)] = same ? 1 : 0;
    });
  }
  for (auto& th : threads) th.join();
  for (int v : ok) CHECK(v == 1);
}

TEST_CASE("ellipsis_length") {
  const auto t = tokenize("a... b\xE2\x80\xA6 c. . . d.... e..");
  // a . . . b … c . . . d . . . . e . .
  CHECK(ellipsis_length(t, 1) == 3);
  CHECK(ellipsis_length(t, 2) == 0);
  CHECK(ellipsis_length(t, 5) == 1);
  CHECK(ellipsis_length(t, 7) == 0);  // spaced dots
  CHECK(ellipsis_length(t, 11) == 4);
  CHECK(ellipsis_length(t, 16) == 0);
  CHECK(ellipsis_length(t, 0) == 0);
  CHECK(ellipsis_length(t, 99) == 0);
}

TEST_CASE("chunk_id: index plus FNV-1a of the chunk text") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  const auto chunks = chunk_document("One sentence. Two sentence.", 3);
  REQUIRE(chunks.size() == 2);
  CHECK(chunk_id(chunks[0]) == "0-" + [] {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64("One sentence. ")));
    return std::string(buf);
  }());
  CHECK(chunk_id(chunks[1]).rfind("1-", 0) == 0);
  CHECK(chunk_id(chunks[1]).size() == 18);
}
