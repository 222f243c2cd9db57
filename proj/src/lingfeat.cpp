#include "keystage/lingfeat.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "keystage/errors.hpp"

namespace keystage::lingfeat {

using lexicons::PosTag;
using textseg::SegmentedText;

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

bool has_letter(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || u >= 0x80;
  });
}

// Word-bearing sentences as lists of token indices.
std::vector<std::vector<std::size_t>> sentence_words(const SegmentedText& seg) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& s : seg.sentences) {
    std::vector<std::size_t> words;
    for (std::size_t t = s.begin; t < s.end; ++t) {
      if (seg.tokens[t].is_word()) words.push_back(t);
    }
    if (!words.empty()) out.push_back(std::move(words));
  }
  return out;
}

std::size_t word_paragraphs(const SegmentedText& seg) {
  std::size_t n = 0;
  for (const auto& p : seg.paragraphs) {
    bool any = false;
    for (std::size_t s = p.begin; s < p.end && !any; ++s) {
      const auto& range = seg.sentences[s];
      for (std::size_t t = range.begin; t < range.end; ++t) {
        if (seg.tokens[t].is_word()) {
          any = true;
          break;
        }
      }
    }
    if (any) ++n;
  }
  return n;
}

void require_words(const SegmentedText& seg) {
  if (seg.word_count() == 0) throw DegenerateInputError("text contains no words");
}

std::string strip_possessive(std::string_view w) {
  for (std::string_view suffix : {"'s", "\xE2\x80\x99s"}) {
    if (w.size() > suffix.size() && w.substr(w.size() - suffix.size()) == suffix) {
      return std::string(w.substr(0, w.size() - suffix.size()));
    }
  }
  return std::string(w);
}

std::vector<std::string> inflection_bases(const std::string& w) {
  std::vector<std::string> out;
  auto ends = [&](std::string_view s) {
    return w.size() > s.size() + 1 && w.compare(w.size() - s.size(), s.size(), s) == 0;
  };
  auto cut = [&](std::size_t n) { return w.substr(0, w.size() - n); };
  auto add_with_undouble = [&](const std::string& stem) {
    out.push_back(stem);
    out.push_back(stem + "e");
    if (stem.size() >= 2 && stem[stem.size() - 1] == stem[stem.size() - 2]) {
      out.push_back(stem.substr(0, stem.size() - 1));
    }
  };
  if (ends("ies")) out.push_back(cut(3) + "y");
  if (ends("es")) out.push_back(cut(2));
  if (ends("s")) out.push_back(cut(1));
  if (ends("ied")) out.push_back(cut(3) + "y");
  if (ends("ed")) add_with_undouble(cut(2));
  if (ends("ing")) add_with_undouble(cut(3));
  if (ends("ier")) out.push_back(cut(3) + "y");
  if (ends("iest")) out.push_back(cut(4) + "y");
  if (ends("er")) add_with_undouble(cut(2));
  if (ends("est")) add_with_undouble(cut(3));
  return out;
}

enum class PunctClass {
  FullStop, Comma, Exclamation, Question, Colon, Semicolon, Quotation, Dash, Bracket,
  Ellipsis, Other
};

PunctClass classify_punct(std::string_view s) {
  if (s == ".") return PunctClass::FullStop;
  if (s == ",") return PunctClass::Comma;
  if (s == "!") return PunctClass::Exclamation;
  if (s == "?") return PunctClass::Question;
  if (s == ":") return PunctClass::Colon;
  if (s == ";") return PunctClass::Semicolon;
  if (s == "\"" || s == "'" || s == "\xE2\x80\x9C" || s == "\xE2\x80\x9D" ||
      s == "\xE2\x80\x98" || s == "\xE2\x80\x99" || s == "\xC2\xAB" || s == "\xC2\xBB") {
    return PunctClass::Quotation;
  }
  if (s == "-" || s == "\xE2\x80\x92" || s == "\xE2\x80\x93" || s == "\xE2\x80\x94" ||
      s == "\xE2\x80\x95" || s == "\xE2\x80\x90" || s == "\xE2\x80\x91") {
    return PunctClass::Dash;
  }
  if (s == "(" || s == ")" || s == "[" || s == "]" || s == "{" || s == "}") {
    return PunctClass::Bracket;
  }
  if (s == "\xE2\x80\xA6") return PunctClass::Ellipsis;
  return PunctClass::Other;
}

constexpr std::array<std::string_view, 11> kPunctNames = {
    "full_stop", "comma", "exclamation", "question", "colon", "semicolon",
    "quotation", "dash", "bracket", "ellipsis", "other"};

void append(NamedValues& out, const NamedValues& more) {
  out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

double value_of(const NamedValues& values, std::string_view name) {
  for (const auto& nv : values) {
    if (nv.name == name) return nv.value;
  }
  throw ValidationError("no feature named " + std::string(name));
}

std::vector<std::string> lower_words(const SegmentedText& seg) {
  std::vector<std::string> out;
  out.reserve(seg.tokens.size());
  for (const auto& t : seg.tokens) {
    if (t.is_word()) out.push_back(textseg::to_lower(t.surface));
  }
  return out;
}

bool is_difficult(std::string_view lower, const lexicons::WordList& familiar) {
  if (!has_letter(lower)) return false;
  const std::string w = strip_possessive(lower);
  if (familiar.contains(w)) return false;
  for (const auto& base : inflection_bases(w)) {
    if (familiar.contains(base)) return false;
  }
  return true;
}

TextCounts count_operands(const SegmentedText& seg, const lexicons::WordList& familiar) {
  TextCounts c;
  std::unordered_set<std::string> types;
  for (const auto& t : seg.tokens) {
    if (!t.is_word()) continue;
    ++c.words;
    const std::string lower = textseg::to_lower(t.surface);
    types.insert(lower);
    c.characters += t.char_count;
    c.syllables += t.syllables;
    if (t.char_count > 6) ++c.long_words;
    if (t.syllables >= 3) {
      ++c.complex_words;
      ++c.polysyllables;
    }
    if (is_difficult(lower, familiar)) ++c.difficult_words;
  }
  c.unique_words = types.size();
  c.sentences = sentence_words(seg).size();
  c.paragraphs = word_paragraphs(seg);
  return c;
}

NamedValues basic_metrics(const SegmentedText& seg) {
  require_words(seg);
  const auto words = lower_words(seg);
  const std::unordered_set<std::string> types(words.begin(), words.end());
  std::size_t chars = 0;
  for (const auto& t : seg.tokens) {
    if (t.is_word()) chars += t.char_count;
  }
  const double n = static_cast<double>(words.size());
  const double s = static_cast<double>(sentence_words(seg).size());
  return {{"basic.words", n},
          {"basic.sentences", s},
          {"basic.unique_words", static_cast<double>(types.size())},
          {"basic.mean_sentence_length", n / s},
          {"basic.mean_word_length", static_cast<double>(chars) / n}};
}

NamedValues sentence_info(const SegmentedText& seg, const lexicons::WordList& familiar) {
  require_words(seg);
  const TextCounts c = count_operands(seg, familiar);
  const double w = static_cast<double>(c.words);
  const double s = static_cast<double>(c.sentences);
  return {{"sentence_info.chars_per_word", c.characters / w},
          {"sentence_info.syllables_per_word", c.syllables / w},
          {"sentence_info.chars_per_sentence", c.characters / s},
          {"sentence_info.syllables_per_sentence", c.syllables / s},
          {"sentence_info.words_per_sentence", w / s},
          {"sentence_info.types_per_sentence", c.unique_words / s},
          {"sentence_info.paragraphs_per_sentence", c.paragraphs / s},
          {"sentence_info.long_words_per_sentence", c.long_words / s},
          {"sentence_info.complex_words_per_sentence", c.complex_words / s},
          {"sentence_info.difficult_words_per_sentence", c.difficult_words / s}};
}

DiversityMetrics diversity(std::span<const std::string> words_lower) {
  if (words_lower.empty()) throw DegenerateInputError("diversity needs at least one word");
  std::unordered_map<std::string_view, std::size_t> freq;
  for (const auto& w : words_lower) ++freq[w];
  std::map<std::size_t, std::size_t> spectrum;  // m -> V_m
  for (const auto& [w, f] : freq) ++spectrum[f];

  const double n = static_cast<double>(words_lower.size());
  const double v = static_cast<double>(freq.size());
  const double v1 = spectrum.contains(1) ? static_cast<double>(spectrum.at(1)) : 0.0;

  DiversityMetrics d;
  d.ttr = v / n;

  double m2vm = 0.0;
  for (const auto& [m, vm] : spectrum) {
    m2vm += static_cast<double>(m) * static_cast<double>(m) * static_cast<double>(vm);
  }
  d.yule_k = 1e4 * (m2vm - n) / (n * n);

  if (words_lower.size() >= 2) {
    double pairs = 0.0;
    for (const auto& [w, f] : freq) pairs += static_cast<double>(f) * static_cast<double>(f - 1);
    d.simpson_d = pairs / (n * (n - 1.0));
  }
  if (freq.size() > 1) d.herdan_c = std::log(n) / std::log(v);
  d.brunet_w = std::pow(n, std::pow(v, -0.165));
  if (v1 != v) d.honore_r = 100.0 * std::log(n) / (1.0 - v1 / v);
  return d;
}

DiversityMetrics diversity(const SegmentedText& seg) {
  const auto words = lower_words(seg);
  return diversity(std::span<const std::string>(words));
}

ReadabilityScores readability(const TextCounts& c) {
  if (c.words == 0 || c.sentences == 0) {
    throw DegenerateInputError("readability needs at least one word and one sentence");
  }
  const double w = static_cast<double>(c.words);
  const double s = static_cast<double>(c.sentences);
  const double wps = w / s;
  const double spw = static_cast<double>(c.syllables) / w;

  ReadabilityScores r;
  r.kincaid = 0.39 * wps + 11.8 * spw - 15.59;
  r.ari = 4.71 * (static_cast<double>(c.characters) / w) + 0.5 * wps - 21.43;
  const double letters_per_100 = 100.0 * static_cast<double>(c.characters) / w;
  const double sentences_per_100 = 100.0 * s / w;
  r.coleman_liau = 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;
  r.flesch = 206.835 - 1.015 * wps - 84.6 * spw;
  r.gunning_fog = 0.4 * (wps + 100.0 * static_cast<double>(c.complex_words) / w);
  r.lix = wps + 100.0 * static_cast<double>(c.long_words) / w;
  r.smog = 1.0430 * std::sqrt(static_cast<double>(c.polysyllables) * 30.0 / s) + 3.1291;
  r.rix = static_cast<double>(c.long_words) / s;
  r.dale_chall = 0.1579 * (100.0 * static_cast<double>(c.difficult_words) / w) + 0.0496 * wps;
  return r;
}

ReadabilityScores readability(const SegmentedText& seg, const lexicons::WordList& familiar) {
  return readability(count_operands(seg, familiar));
}

NamedValues sentence_structure(const SegmentedText& seg, const std::vector<PosTag>& tags) {
  require_words(seg);
  if (tags.size() != seg.word_count()) {
    throw DimensionError("tag count does not match word count");
  }
  std::array<std::size_t, 13> by_tag{};
  for (PosTag t : tags) ++by_tag[static_cast<std::size_t>(t)];
  auto count = [&](PosTag t) { return static_cast<double>(by_tag[static_cast<std::size_t>(t)]); };

  const auto sentences = sentence_words(seg);
  double ttr_sum = 0.0;
  for (const auto& words : sentences) {
    std::unordered_set<std::string> types;
    for (std::size_t t : words) types.insert(textseg::to_lower(seg.tokens[t].surface));
    ttr_sum += static_cast<double>(types.size()) / static_cast<double>(words.size());
  }
  const double w = static_cast<double>(seg.word_count());
  const double s = static_cast<double>(sentences.size());
  const double p = static_cast<double>(word_paragraphs(seg));
  return {{"structure.vbn", count(PosTag::VBN)},
          {"structure.vbz", count(PosTag::VBZ)},
          {"structure.vbd", count(PosTag::VBD)},
          {"structure.vb_vbp", count(PosTag::VB) + count(PosTag::VBP)},
          {"structure.nn", count(PosTag::NN)},
          {"structure.vbg", count(PosTag::VBG)},
          {"structure.mean_sentence_ttr", ttr_sum / s},
          {"structure.mean_words_per_sentence", w / s},
          {"structure.mean_words_per_paragraph", ratio(w, p)}};
}

NamedValues word_usage(const SegmentedText& seg, const std::vector<PosTag>& tags) {
  if (tags.size() != seg.word_count()) {
    throw DimensionError("tag count does not match word count");
  }
  namespace cc = lexicons::closed_class;
  double pronouns = 0, function_words = 0, conjunctions = 0, prepositions = 0;
  for (const auto& t : seg.tokens) {
    if (!t.is_word()) continue;
    const std::string w = textseg::to_lower(t.surface);
    if (cc::is_pronoun(w)) ++pronouns;
    if (cc::is_function_word(w)) ++function_words;
    if (cc::is_coordinator(w) || cc::is_subordinator(w)) ++conjunctions;
    if (cc::is_preposition(w)) ++prepositions;
  }
  return {{"usage.pronouns", pronouns},
          {"usage.function_words", function_words},
          {"usage.conjunctions", conjunctions},
          {"usage.prepositions", prepositions}};
}

NamedValues punctuation_style(const SegmentedText& seg, const std::vector<PosTag>& tags) {
  if (tags.size() != seg.word_count()) {
    throw DimensionError("tag count does not match word count");
  }
  std::array<double, kPunctNames.size()> marks{};
  double total = 0.0;
  for (std::size_t i = 0; i < seg.tokens.size(); ++i) {
    const auto& t = seg.tokens[i];
    if (!t.is_punct()) continue;
    if (const std::size_t run = textseg::ellipsis_length(seg.tokens, i); run > 1) {
      ++marks[static_cast<std::size_t>(PunctClass::Ellipsis)];
      ++total;
      i += run - 1;
      continue;
    }
    ++marks[static_cast<std::size_t>(classify_punct(t.surface))];
    ++total;
  }
  namespace cc = lexicons::closed_class;
  double pronoun = 0, interrogative = 0, article = 0, subordination = 0, conjunction = 0,
         preposition = 0;
  for (const auto& words : sentence_words(seg)) {
    const std::string first = textseg::to_lower(seg.tokens[words.front()].surface);
    if (cc::is_pronoun(first)) ++pronoun;
    if (cc::is_interrogative(first)) ++interrogative;
    if (cc::is_article(first)) ++article;
    if (cc::is_subordinator(first)) ++subordination;
    if (cc::is_coordinator(first)) ++conjunction;
    if (cc::is_preposition(first)) ++preposition;
  }
  NamedValues out;
  out.push_back({"punct.total", total});
  for (std::size_t i = 0; i < kPunctNames.size(); ++i) {
    out.push_back({"punct." + std::string(kPunctNames[i]), marks[i]});
  }
  out.push_back({"style.pronoun_initial", pronoun});
  out.push_back({"style.interrogative_initial", interrogative});
  out.push_back({"style.article_initial", article});
  out.push_back({"style.subordination_initial", subordination});
  out.push_back({"style.conjunction_initial", conjunction});
  out.push_back({"style.preposition_initial", preposition});
  return out;
}

NamedValues sentiment_emotion(const SegmentedText& seg, const lexicons::AffectLexicon& affect) {
  double polarity = 0.0, subjectivity = 0.0;
  std::size_t matched = 0;
  std::array<double, lexicons::kNumEmotions> emotions{};
  std::size_t words = 0;
  for (const auto& t : seg.tokens) {
    if (!t.is_word()) continue;
    ++words;
    const auto* entry = affect.find(t.surface);
    if (!entry) continue;
    ++matched;
    polarity += entry->polarity;
    subjectivity += entry->subjectivity;
    for (std::size_t e = 0; e < lexicons::kNumEmotions; ++e) {
      if (entry->emotions[e]) ++emotions[e];
    }
  }
  NamedValues out = {{"sentiment.polarity", ratio(polarity, static_cast<double>(matched))},
                     {"sentiment.subjectivity", ratio(subjectivity, static_cast<double>(matched))}};
  for (std::size_t e = 0; e < lexicons::kNumEmotions; ++e) {
    out.push_back({"emotion." + std::string(lexicons::to_string(lexicons::kEmotions[e])),
                   ratio(emotions[e], static_cast<double>(words))});
  }
  return out;
}

NamedValues named_entities(const SegmentedText& seg, const lexicons::Gazetteer& gazetteer) {
  const auto counts = lexicons::ner_counts(seg, gazetteer);
  NamedValues out;
  for (std::string_view label : lexicons::kNerLabels) {
    out.push_back({"ner." + std::string(label),
                   static_cast<double>(counts.at(std::string(label)))});
  }
  return out;
}

const std::vector<FeatureSpec>& schema() {
  static const std::vector<FeatureSpec> specs = [] {
    std::vector<FeatureSpec> s = {
        {"basic.words", "basic", "N, word tokens"},
        {"basic.sentences", "basic", "sentences containing at least one word"},
        {"basic.unique_words", "basic", "V, case-folded word types"},
        {"basic.mean_sentence_length", "basic", "N / sentences"},
        {"basic.mean_word_length", "basic", "alphanumeric characters / N"},
        {"sentence_info.chars_per_word", "sentence_info", "characters / N"},
        {"sentence_info.syllables_per_word", "sentence_info", "syllables / N"},
        {"sentence_info.chars_per_sentence", "sentence_info", "characters / sentences"},
        {"sentence_info.syllables_per_sentence", "sentence_info", "syllables / sentences"},
        {"sentence_info.words_per_sentence", "sentence_info", "N / sentences"},
        {"sentence_info.types_per_sentence", "sentence_info", "V / sentences"},
        {"sentence_info.paragraphs_per_sentence", "sentence_info", "paragraphs / sentences"},
        {"sentence_info.long_words_per_sentence", "sentence_info",
         "words over 6 characters / sentences"},
        {"sentence_info.complex_words_per_sentence", "sentence_info",
         "words of 3+ syllables / sentences"},
        {"sentence_info.difficult_words_per_sentence", "sentence_info",
         "unfamiliar words / sentences"},
        {"diversity.ttr", "diversity", "V / N"},
        {"diversity.yule_k", "diversity", "1e4 * (sum_m m^2 V_m - N) / N^2"},
        {"diversity.simpson_d", "diversity", "sum f(f-1) / (N(N-1)); 0 when N < 2"},
        {"diversity.herdan_c", "diversity", "ln N / ln V; 0 when V <= 1"},
        {"diversity.brunet_w", "diversity", "N ^ (V ^ -0.165)"},
        {"diversity.honore_r", "diversity", "100 ln N / (1 - V1/V); 0 when V1 = V"},
        {"readability.kincaid", "readability", "0.39 W/S + 11.8 Syl/W - 15.59"},
        {"readability.ari", "readability", "4.71 Ch/W + 0.5 W/S - 21.43"},
        {"readability.coleman_liau", "readability", "0.0588 L - 0.296 S - 15.8"},
        {"readability.flesch", "readability", "206.835 - 1.015 W/S - 84.6 Syl/W"},
        {"readability.gunning_fog", "readability", "0.4 (W/S + 100 Complex/W)"},
        {"readability.lix", "readability", "W/S + 100 Long/W"},
        {"readability.smog", "readability", "1.0430 sqrt(Poly * 30 / S) + 3.1291"},
        {"readability.rix", "readability", "Long / S"},
        {"readability.dale_chall", "readability",
         "0.1579 (100 Difficult/W) + 0.0496 W/S, no adjustment term"},
        {"structure.vbn", "sentence_structure", "count of VBN"},
        {"structure.vbz", "sentence_structure", "count of VBZ"},
        {"structure.vbd", "sentence_structure", "count of VBD"},
        {"structure.vb_vbp", "sentence_structure", "count of VB or VBP"},
        {"structure.nn", "sentence_structure", "count of NN"},
        {"structure.vbg", "sentence_structure", "count of VBG"},
        {"structure.mean_sentence_ttr", "sentence_structure", "mean over sentences of V/N"},
        {"structure.mean_words_per_sentence", "sentence_structure", "N / sentences"},
        {"structure.mean_words_per_paragraph", "sentence_structure", "N / paragraphs"},
        {"usage.pronouns", "word_usage", "count of pronouns"},
        {"usage.function_words", "word_usage", "count of function words"},
        {"usage.conjunctions", "word_usage", "count of coordinators and subordinators"},
        {"usage.prepositions", "word_usage", "count of prepositions"},
        {"punct.total", "punctuation_style", "count of punctuation tokens"},
    };
    for (std::string_view p : kPunctNames) {
      s.push_back({"punct." + std::string(p), "punctuation_style", "count of " + std::string(p) +
                                                                         " marks"});
    }
    for (std::string_view k : {"pronoun", "interrogative", "article", "subordination",
                               "conjunction", "preposition"}) {
      s.push_back({"style." + std::string(k) + "_initial", "punctuation_style",
                   "sentences whose first word is a " + std::string(k)});
    }
    s.push_back({"sentiment.polarity", "sentiment", "mean polarity of matched words, [-1, 1]"});
    s.push_back({"sentiment.subjectivity", "sentiment",
                 "mean subjectivity of matched words, [0, 1]"});
    for (auto e : lexicons::kEmotions) {
      s.push_back({"emotion." + std::string(lexicons::to_string(e)), "emotion",
                   "words carrying " + std::string(lexicons::to_string(e)) + " / N"});
    }
    for (std::string_view label : lexicons::kNerLabels) {
      s.push_back({"ner." + std::string(label), "ner", "count of " + std::string(label) +
                                                           " entities"});
    }
    return s;
  }();
  return specs;
}

std::vector<std::string> feature_names() {
  std::vector<std::string> out;
  for (const auto& s : schema()) out.push_back(s.name);
  return out;
}

nlohmann::json schema_json() {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& s : schema()) {
    features.push_back({{"name", s.name}, {"category", s.category}, {"formula", s.formula}});
  }
  return {{"schema_version", kSchemaVersion},
          {"dimension", schema().size()},
          {"features", features}};
}

NamedValues extract_named(const SegmentedText& seg, const lexicons::Lexicons& lex) {
  require_words(seg);
  const auto tags = lexicons::tag_pos(seg);
  NamedValues out = basic_metrics(seg);
  append(out, sentence_info(seg, lex.dale_chall));

  const DiversityMetrics d = diversity(seg);
  append(out, {{"diversity.ttr", d.ttr},
               {"diversity.yule_k", d.yule_k},
               {"diversity.simpson_d", d.simpson_d},
               {"diversity.herdan_c", d.herdan_c},
               {"diversity.brunet_w", d.brunet_w},
               {"diversity.honore_r", d.honore_r}});

  const ReadabilityScores r = readability(seg, lex.dale_chall);
  append(out, {{"readability.kincaid", r.kincaid},
               {"readability.ari", r.ari},
               {"readability.coleman_liau", r.coleman_liau},
               {"readability.flesch", r.flesch},
               {"readability.gunning_fog", r.gunning_fog},
               {"readability.lix", r.lix},
               {"readability.smog", r.smog},
               {"readability.rix", r.rix},
               {"readability.dale_chall", r.dale_chall}});

  append(out, sentence_structure(seg, tags));
  append(out, word_usage(seg, tags));
  append(out, punctuation_style(seg, tags));
  append(out, sentiment_emotion(seg, lex.affect));
  append(out, named_entities(seg, lex.gazetteer));
  return out;
}

FeatureVector extract_features(const SegmentedText& seg, const lexicons::Lexicons& lex) {
  const NamedValues named = extract_named(seg, lex);
  FeatureVector v;
  v.values.reserve(named.size());
  for (const auto& nv : named) v.values.push_back(nv.value);
  return v;
}

}  // namespace keystage::lingfeat
