#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "keystage/errors.hpp"
#include "keystage/lingfeat.hpp"
#include "keystage/rng.hpp"
#include "support.hpp"

using namespace keystage;
using namespace keystage::lingfeat;
using keystage::lexicons::PosTag;
using keystage::textseg::segment;

namespace {

const lexicons::WordList& familiar() { return test_support::lexicons().dale_chall; }

constexpr double kTol = 1e-9;

void check_close(double actual, double expected, const std::string& what) {
  INFO(what << " actual=" << actual << " expected=" << expected);
  CHECK(std::abs(actual - expected) < kTol);
}

std::vector<std::string> words(std::initializer_list<const char*> ws) {
  return {ws.begin(), ws.end()};
}

lexicons::AffectLexicon affect_of(std::initializer_list<std::pair<const char*, double>> pol) {
  std::unordered_map<std::string, lexicons::AffectEntry> m;
  for (const auto& [w, p] : pol) {
    lexicons::AffectEntry e;
    e.polarity = p;
    e.subjectivity = std::abs(p);
    m[w] = e;
  }
  return lexicons::AffectLexicon(m);
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> vocab = {
      "the", "a", "cat", "extraordinary", "ran", "he", "she", "because", "and", "London",
      "happy", "terrible", "photosynthesis", "is", "was", "walked", "running", "Mr", "Alice",
      "x", "42", "don't", "well-known", "why", "therefore"};
  static const std::vector<std::string> punct = {".", "!", "?", ",", ";", ":", "\"", "(", ")",
                                                 "-", "...", "—"};
  std::string s;
  const std::size_t n = 1 + rng.uniform_index(60);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform01() < 0.2) {
      s += punct[rng.uniform_index(punct.size())];
    } else {
      s += " " + vocab[rng.uniform_index(vocab.size())];
    }
    if (rng.uniform01() < 0.05) s += "\n\n";
  }
  return s;
}

}  // namespace

TEST_CASE("basic_metrics: spec examples") {
  const auto b = basic_metrics(segment("The cat sat."));
  CHECK(value_of(b, "basic.words") == 3);
  CHECK(value_of(b, "basic.sentences") == 1);
  CHECK(value_of(b, "basic.unique_words") == 3);
  CHECK(value_of(b, "basic.mean_sentence_length") == 3);
  CHECK(value_of(b, "basic.mean_word_length") == 3);
  CHECK(value_of(basic_metrics(segment("a a")), "basic.unique_words") == 1);
  CHECK_THROWS_AS(basic_metrics(segment("")), DegenerateInputError);
  CHECK_THROWS_AS(basic_metrics(segment("... !")), DegenerateInputError);
}

TEST_CASE("diversity: hand-evaluated example a a b") {
  const auto w = words({"a", "a", "b"});
  const DiversityMetrics d = diversity(std::span<const std::string>(w));
  check_close(d.ttr, 2.0 / 3.0, "ttr");
  check_close(d.simpson_d, 2.0 / 6.0, "simpson");
  check_close(d.yule_k, 1e4 * (5.0 - 3.0) / 9.0, "yule");
  check_close(d.herdan_c, std::log(3.0) / std::log(2.0), "herdan");
  check_close(d.brunet_w, std::pow(3.0, std::pow(2.0, -0.165)), "brunet");
  check_close(d.honore_r, 100.0 * std::log(3.0) / 0.5, "honore");
  CHECK(d.yule_k == doctest::Approx(2222.22).epsilon(1e-6));
  CHECK(d.herdan_c == doctest::Approx(1.585).epsilon(1e-3));
  CHECK(d.brunet_w == doctest::Approx(2.664).epsilon(1e-3));
  CHECK(d.honore_r == doctest::Approx(219.72).epsilon(1e-4));
}

TEST_CASE("diversity: no repetition and guards") {
  const auto abc = words({"a", "b", "c"});
  const auto d = diversity(std::span<const std::string>(abc));
  CHECK(d.ttr == 1.0);
  CHECK(d.simpson_d == 0.0);
  CHECK(d.honore_r == 0.0);  // V1 = V guard

  const auto aaa = words({"a", "a", "a"});
  const auto g = diversity(std::span<const std::string>(aaa));
  CHECK(g.herdan_c == 0.0);  // V = 1 guard
  check_close(g.honore_r, 100.0 * std::log(3.0), "honore with no hapax");
  CHECK(std::isfinite(g.yule_k));

  const auto one = words({"a"});
  const auto s = diversity(std::span<const std::string>(one));
  CHECK(s.simpson_d == 0.0);  // N < 2 guard
  CHECK(s.herdan_c == 0.0);
  CHECK(s.honore_r == 0.0);
  CHECK(std::isfinite(s.brunet_w));
}

TEST_CASE("diversity: Yule's K does not depend on type order") {
  const auto x = words({"b", "a", "c", "a", "b", "a"});
  const auto y = words({"a", "a", "a", "b", "b", "c"});
  CHECK(diversity(std::span<const std::string>(x)).yule_k ==
        diversity(std::span<const std::string>(y)).yule_k);
}

TEST_CASE("readability: The cat sat.") {
  const auto r = readability(segment("The cat sat."), familiar());
  check_close(r.flesch, 119.19, "flesch");
  check_close(r.kincaid, -2.62, "kincaid");
  check_close(r.ari, -5.80, "ari");
  check_close(r.lix, 3.0, "lix");
  check_close(r.rix, 0.0, "rix");
  check_close(r.smog, 3.1291, "smog");
  check_close(r.gunning_fog, 1.2, "fog");
  check_close(r.coleman_liau, 0.0588 * 300 - 0.296 * (100.0 / 3.0) - 15.8, "coleman-liau");
  check_close(r.dale_chall, 0.0496 * 3, "dale-chall");
  CHECK(r.coleman_liau == doctest::Approx(-8.03).epsilon(1e-3));
}

TEST_CASE("readability: no polysyllables gives the SMOG constant") {
  CHECK(readability(segment("I ran. You hid. We sat down."), familiar()).smog == 3.1291);
}

TEST_CASE("readability: doubling every sentence leaves the scores unchanged") {
  const std::string text = "The extraordinary cat sat on a comfortable mat. It purred loudly!";
  const auto a = readability(segment(text), familiar());
  const auto b = readability(segment(text + "\n\n" + text), familiar());
  check_close(a.flesch, b.flesch, "flesch");
  check_close(a.kincaid, b.kincaid, "kincaid");
  check_close(a.ari, b.ari, "ari");
  check_close(a.coleman_liau, b.coleman_liau, "coleman-liau");
  check_close(a.gunning_fog, b.gunning_fog, "fog");
  check_close(a.lix, b.lix, "lix");
  check_close(a.smog, b.smog, "smog");
  check_close(a.rix, b.rix, "rix");
  check_close(a.dale_chall, b.dale_chall, "dale-chall");
}

TEST_CASE("readability: degenerate input") {
  CHECK_THROWS_AS(readability(segment(""), familiar()), DegenerateInputError);
}

TEST_CASE("difficult words follow regular inflections of the familiar list") {
  lexicons::WordList easy("easy", {"walk", "cry", "stop", "big", "make"});
  CHECK_FALSE(is_difficult("walked", easy));
  CHECK_FALSE(is_difficult("walks", easy));
  CHECK_FALSE(is_difficult("walking", easy));
  CHECK_FALSE(is_difficult("cries", easy));
  CHECK_FALSE(is_difficult("cried", easy));
  CHECK_FALSE(is_difficult("stopped", easy));
  CHECK_FALSE(is_difficult("bigger", easy));
  CHECK_FALSE(is_difficult("biggest", easy));
  CHECK_FALSE(is_difficult("making", easy));
  CHECK_FALSE(is_difficult("walk's", easy));
  CHECK_FALSE(is_difficult("1865", easy));
  CHECK(is_difficult("stroll", easy));
  CHECK(is_difficult("walkway", easy));
}

TEST_CASE("formula oracle: ten-text corpus") {
  const auto oracle = nlohmann::json::parse(
      test_support::read_file(test_support::fixtures() / "formula_oracle.json"));
  REQUIRE(oracle.size() == 10);
  for (const auto& [name, expected] : oracle.items()) {
    CAPTURE(name);
    const std::string text =
        test_support::read_file(test_support::fixtures() / "corpus" / name);
    const auto seg = segment(text);
    const TextCounts c = count_operands(seg, familiar());
    const auto& ops = expected["operands"];
    CHECK(c.words == ops["words"].get<std::size_t>());
    CHECK(c.sentences == ops["sentences"].get<std::size_t>());
    CHECK(c.unique_words == ops["unique"].get<std::size_t>());
    CHECK(c.characters == ops["characters"].get<std::size_t>());
    CHECK(c.syllables == ops["syllables"].get<std::size_t>());
    CHECK(c.long_words == ops["long"].get<std::size_t>());
    CHECK(c.polysyllables == ops["polysyllables"].get<std::size_t>());
    CHECK(c.difficult_words == ops["difficult"].get<std::size_t>());

    const auto r = readability(seg, familiar());
    const auto& er = expected["readability"];
    check_close(r.kincaid, er["kincaid"], name + " kincaid");
    check_close(r.ari, er["ari"], name + " ari");
    check_close(r.coleman_liau, er["coleman_liau"], name + " coleman_liau");
    check_close(r.flesch, er["flesch"], name + " flesch");
    check_close(r.gunning_fog, er["gunning_fog"], name + " gunning_fog");
    check_close(r.lix, er["lix"], name + " lix");
    check_close(r.smog, er["smog"], name + " smog");
    check_close(r.rix, er["rix"], name + " rix");
    check_close(r.dale_chall, er["dale_chall"], name + " dale_chall");

    const auto d = diversity(seg);
    const auto& ed = expected["diversity"];
    check_close(d.ttr, ed["ttr"], name + " ttr");
    check_close(d.yule_k, ed["yule_k"], name + " yule_k");
    check_close(d.simpson_d, ed["simpson_d"], name + " simpson_d");
    check_close(d.herdan_c, ed["herdan_c"], name + " herdan_c");
    check_close(d.brunet_w, ed["brunet_w"], name + " brunet_w");
    check_close(d.honore_r, ed["honore_r"], name + " honore_r");
  }
}

TEST_CASE("sentence_structure") {
  SUBCASE("no verbs") {
    const auto seg = segment("Red apples. Green pears.");
    const auto s = sentence_structure(seg, lexicons::tag_pos(seg));
    CHECK(value_of(s, "structure.vbn") == 0);
    CHECK(value_of(s, "structure.vbz") == 0);
    CHECK(value_of(s, "structure.vbd") == 0);
    CHECK(value_of(s, "structure.vb_vbp") == 0);
    CHECK(value_of(s, "structure.vbg") == 0);
  }
  SUBCASE("single sentence: mean sentence TTR equals document TTR") {
    const auto seg = segment("the dog and the cat and the bird sang");
    const auto s = sentence_structure(seg, lexicons::tag_pos(seg));
    check_close(value_of(s, "structure.mean_sentence_ttr"), diversity(seg).ttr, "ttr");
  }
  SUBCASE("hand-tagged two-sentence fixture") {
    // She has walked home. The dog runs and barks.
    const auto seg = segment("She has walked home.\n\nThe dog runs and barks.");
    const std::vector<PosTag> tags = {PosTag::PRP, PosTag::VBZ, PosTag::VBN, PosTag::NN,
                                      PosTag::DT,  PosTag::NN,  PosTag::VBZ, PosTag::CC,
                                      PosTag::VBZ};
    const auto s = sentence_structure(seg, tags);
    CHECK(value_of(s, "structure.vbn") == 1);
    CHECK(value_of(s, "structure.vbz") == 3);
    CHECK(value_of(s, "structure.vbd") == 0);
    CHECK(value_of(s, "structure.vb_vbp") == 0);
    CHECK(value_of(s, "structure.nn") == 2);
    CHECK(value_of(s, "structure.vbg") == 0);
    check_close(value_of(s, "structure.mean_sentence_ttr"), 1.0, "ttr");
    check_close(value_of(s, "structure.mean_words_per_sentence"), 4.5, "wps");
    check_close(value_of(s, "structure.mean_words_per_paragraph"), 4.5, "wpp");
    CHECK(lexicons::tag_pos(seg) == tags);
  }
  SUBCASE("misaligned tags") {
    const auto seg = segment("One two.");
    CHECK_THROWS_AS(sentence_structure(seg, {PosTag::NN}), DimensionError);
  }
}

TEST_CASE("word_usage") {
  const auto seg = segment("he and she");
  const auto u = word_usage(seg, lexicons::tag_pos(seg));
  CHECK(value_of(u, "usage.pronouns") == 2);
  CHECK(value_of(u, "usage.conjunctions") == 1);
  CHECK(value_of(u, "usage.function_words") == 3);

  const auto plain = segment("Green apples fell");
  const auto z = word_usage(plain, lexicons::tag_pos(plain));
  CHECK(value_of(z, "usage.pronouns") == 0);
  CHECK(value_of(z, "usage.function_words") == 0);
  CHECK(value_of(z, "usage.conjunctions") == 0);
  CHECK(value_of(z, "usage.prepositions") == 0);
}

TEST_CASE("punctuation_style") {
  auto run = [](const std::string& text) {
    const auto seg = segment(text);
    return punctuation_style(seg, lexicons::tag_pos(seg));
  };
  const auto a = run("Why not? Because.");
  CHECK(value_of(a, "style.interrogative_initial") == 1);
  CHECK(value_of(a, "style.subordination_initial") == 1);
  CHECK(value_of(a, "punct.question") == 1);
  CHECK(value_of(a, "punct.full_stop") == 1);

  const auto none = run("no punctuation at all");
  for (const auto& nv : none) {
    if (nv.name.rfind("punct.", 0) == 0) CHECK(nv.value == 0);
  }
  CHECK(value_of(run("He ran. He hid."), "style.pronoun_initial") == 2);
  const auto mix = run("The end; and (then) \"more\"—in London…");
  CHECK(value_of(mix, "style.article_initial") == 1);
  CHECK(value_of(mix, "punct.semicolon") == 1);
  CHECK(value_of(mix, "punct.bracket") == 2);
  CHECK(value_of(mix, "punct.quotation") == 2);
  CHECK(value_of(mix, "punct.dash") == 1);
  CHECK(value_of(mix, "punct.ellipsis") == 1);

  const auto dots = run("Wait... no. Then . . . nothing");
  CHECK(value_of(dots, "punct.ellipsis") == 1);
  CHECK(value_of(dots, "punct.full_stop") == 4);
  CHECK(value_of(dots, "punct.total") == 5);
}

TEST_CASE("sentiment_emotion") {
  const auto none = sentiment_emotion(segment("plain words here"), affect_of({{"good", 0.7}}));
  for (const auto& nv : none) CHECK(nv.value == 0.0);

  const auto one = sentiment_emotion(segment("a great day"), affect_of({{"great", 0.8}}));
  CHECK(value_of(one, "sentiment.polarity") == 0.8);

  const auto sym =
      sentiment_emotion(segment("good and bad"), affect_of({{"good", 0.5}, {"bad", -0.5}}));
  CHECK(value_of(sym, "sentiment.polarity") == 0.0);

  const auto& lex = test_support::lexicons();
  const auto e = sentiment_emotion(segment("The happy child laughed with joy."), lex.affect);
  CHECK(value_of(e, "emotion.joy") > 0.0);
  CHECK(value_of(e, "emotion.joy") <= 1.0);
}

TEST_CASE("extract_features: fixed schema") {
  const auto& lex = test_support::lexicons();
  const auto a = extract_named(segment("The cat sat."), lex);
  const auto b = extract_named(segment("A much longer text, with commas; and London.\n\nMore."),
                               lex);
  REQUIRE(a.size() == schema().size());
  REQUIRE(b.size() == schema().size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == schema()[i].name);
    CHECK(b[i].name == schema()[i].name);
  }
  CHECK(extract_features(segment("x"), lex).size() == schema().size());
  CHECK_THROWS_AS(extract_features(segment(""), lex), DegenerateInputError);

  const auto js = schema_json();
  CHECK(js["schema_version"] == std::string(kSchemaVersion));
  CHECK(js["features"].size() == schema().size());
}

TEST_CASE("extract_features: no NaN or Inf for any text with a word") {
  const auto& lex = test_support::lexicons();
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string text = random_text(rng);
    const auto seg = segment(text);
    if (seg.word_count() == 0) continue;
    const auto v = extract_features(seg, lex);
    for (double x : v.values) CHECK(std::isfinite(x));
  }
}

TEST_CASE("extract_features: deterministic") {
  const auto& lex = test_support::lexicons();
  const std::string text =
      test_support::read_file(test_support::fixtures() / "corpus" / "03_carol.txt");
  const auto a = extract_features(segment(text), lex);
  const auto b = extract_features(segment(text), lex);
  CHECK(a.values == b.values);
}

TEST_CASE("verbatim duplication: per-sentence means fixed, document TTR halves") {
  const auto& lex = test_support::lexicons();
  const std::string text =
      test_support::read_file(test_support::fixtures() / "corpus" / "06_iliad.txt");
  const auto one = extract_named(segment(text), lex);
  const auto two = extract_named(segment(text + "\n\n" + text), lex);
  for (const char* name :
       {"structure.mean_sentence_ttr", "structure.mean_words_per_sentence",
        "structure.mean_words_per_paragraph", "sentence_info.chars_per_sentence",
        "sentence_info.syllables_per_sentence", "sentence_info.paragraphs_per_sentence",
        "readability.flesch", "readability.smog", "readability.dale_chall"}) {
    check_close(value_of(one, name), value_of(two, name), name);
  }
  check_close(value_of(two, "diversity.ttr"), value_of(one, "diversity.ttr") / 2.0, "ttr");
  CHECK(value_of(two, "diversity.simpson_d") > value_of(one, "diversity.simpson_d"));
}

TEST_CASE("golden feature vector") {
  const auto golden = nlohmann::json::parse(
      test_support::read_file(test_support::fixtures() / "golden_features.json"));
  const auto& lex = test_support::lexicons();
  const std::string text =
      test_support::read_file(test_support::fixtures() / "corpus" / golden["text"].get<std::string>());
  const auto named = extract_named(segment(text), lex);
  REQUIRE(golden["features"].size() == named.size());
  for (std::size_t i = 0; i < named.size(); ++i) {
    CAPTURE(named[i].name);
    CHECK(golden["features"][i]["name"] == named[i].name);
    check_close(named[i].value, golden["features"][i]["value"].get<double>(), named[i].name);
  }
}
