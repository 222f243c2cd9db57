#include "keystage/curriculum.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "keystage/errors.hpp"

namespace keystage::curriculum {

namespace {

using textseg::SegmentedText;
using textseg::Token;
using lexicons::PosTag;

const std::vector<std::string> kKs2 = {"simple_sentences", "compound_sentences",
                                       "basic_punctuation", "dialogue", "narrative_indicators"};
const std::vector<std::string> kKs3 = {"complex_sentences",      "advanced_punctuation",
                                       "summarizing_indicators", "implied_meaning",
                                       "similes",                "alliteration"};
const std::vector<std::string> kKs4 = {"compound_complex_sentences", "sophisticated_punctuation",
                                       "evaluative_language",        "repetition",
                                       "personification",            "tone_shifts"};
const std::vector<std::string> kKs5 = {"advanced_inference", "critical_analysis", "irony",
                                       "rhetorical_devices"};

const std::unordered_set<std::string> kQuotes = {"\"", "'", "“", "”",
                                                 "‘", "’", "«", "»"};
const std::unordered_set<std::string> kClauseBreaks = {",", ";", ":", "(", "—", "–", "-"};
const std::unordered_set<std::string> kPossessives = {"my",  "your", "his",  "her",
                                                      "its", "our",  "their", "thy"};

bool is_verb(PosTag t) {
  switch (t) {
    case PosTag::VB: case PosTag::VBP: case PosTag::VBZ:
    case PosTag::VBD: case PosTag::VBN: case PosTag::VBG:
      return true;
    default:
      return false;
  }
}

bool is_content(const std::string& lower) {
  if (lower.empty()) return false;
  const auto c = static_cast<unsigned char>(lower[0]);
  if (!(c >= 'a' && c <= 'z')) return false;
  return !lexicons::closed_class::is_function_word(lower);
}

/// One sentence seen as its words (lower-cased) with their tags and token
/// positions.
struct Sentence {
  textseg::Range tokens;
  std::vector<std::string> words;
  std::vector<std::size_t> word_token;
  std::vector<PosTag> tags;
};

std::vector<Sentence> sentences_of(const SegmentedText& seg, const Tags& tags) {
  std::vector<Sentence> out;
  std::size_t w = 0;
  for (const auto& r : seg.sentences) {
    Sentence s;
    s.tokens = r;
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const Token& t = seg.tokens[i];
      if (!t.is_word()) continue;
      s.words.push_back(textseg::to_lower(t.surface));
      s.word_token.push_back(i);
      s.tags.push_back(w < tags.size() ? tags[w] : PosTag::OTHER);
      ++w;
    }
    out.push_back(std::move(s));
  }
  if (w != tags.size()) {
    throw DimensionError("curriculum: " + std::to_string(tags.size()) + " tags for " +
                         std::to_string(w) + " words");
  }
  return out;
}

/// A coordinator with a verb somewhere on each side.
bool is_compound(const Sentence& s, const Keywords& kw) {
  for (std::size_t i = 1; i + 1 < s.words.size(); ++i) {
    const std::size_t len = kw.coordinators.match_at(s.words, i);
    if (len == 0) continue;
    const bool before = std::any_of(s.tags.begin(), s.tags.begin() + static_cast<long>(i), is_verb);
    const bool after =
        std::any_of(s.tags.begin() + static_cast<long>(i + len), s.tags.end(), is_verb);
    if (before && after) return true;
  }
  return false;
}

bool is_complex(const Sentence& s, const Keywords& kw) { return kw.subordinators.any(s.words); }

bool has_quote(const SegmentedText& seg, const Sentence& s) {
  for (std::size_t i = s.tokens.begin; i < s.tokens.end; ++i) {
    if (seg.tokens[i].is_punct() && kQuotes.contains(seg.tokens[i].surface)) return true;
  }
  return false;
}

/// Ellipses and dashes. A run of two or more hyphen tokens is one dash, as is
/// a lone hyphen with space before it.
std::size_t sophisticated_punctuation(const SegmentedText& seg, const Sentence& s) {
  std::size_t n = 0;
  std::size_t i = s.tokens.begin;
  while (i < s.tokens.end) {
    const Token& t = seg.tokens[i];
    if (const std::size_t e = textseg::ellipsis_length(seg.tokens, i); e > 0) {
      ++n;
      i += e;
      continue;
    }
    if (t.surface == "—" || t.surface == "–") {
      ++n;
    } else if (t.is_punct() && t.surface == "-") {
      std::size_t j = i + 1;
      while (j < s.tokens.end && seg.tokens[j].surface == "-" && !seg.tokens[j].space_before) ++j;
      if (j - i >= 2 || t.space_before) ++n;
      i = j;
      continue;
    }
    ++i;
  }
  return n;
}

std::size_t basic_punctuation(const SegmentedText& seg, const Sentence& s) {
  std::size_t n = 0;
  std::size_t i = s.tokens.begin;
  while (i < s.tokens.end) {
    if (const std::size_t e = textseg::ellipsis_length(seg.tokens, i); e > 0) {
      i += e;
      continue;
    }
    const std::string& p = seg.tokens[i].surface;
    if (seg.tokens[i].is_punct() && (p == "." || p == "," || p == "!" || p == "?")) ++n;
    ++i;
  }
  return n;
}

std::size_t advanced_punctuation(const SegmentedText& seg, const Sentence& s) {
  std::size_t n = 0;
  for (std::size_t i = s.tokens.begin; i < s.tokens.end; ++i) {
    const std::string& p = seg.tokens[i].surface;
    if (seg.tokens[i].is_punct() && (p == ":" || p == ";" || p == "(" || p == ")")) ++n;
  }
  return n;
}

/// "as <content word> as", and "like" before a determiner or possessive when
/// the word before "like" does not make it a verb.
std::size_t similes(const Sentence& s, const Keywords& kw) {
  std::size_t n = 0;
  const auto& w = s.words;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == "as" && i + 2 < w.size() && w[i + 2] == "as" && is_content(w[i + 1])) {
      ++n;
      i += 2;
    } else if (w[i] == "like" && i + 1 < w.size() &&
               (s.tags[i + 1] == PosTag::DT || kPossessives.contains(w[i + 1]))) {
      const bool verb_use = i > 0 && (s.tags[i - 1] == PosTag::PRP ||
                                      kw.like_verb_cues.match_at(w, i - 1) == 1);
      if (!verb_use) ++n;
    }
  }
  return n;
}

/// Maximal runs of three or more adjacent content words with the same first
/// letter. Any punctuation or function word ends a run.
std::size_t alliteration(const Sentence& s) {
  std::size_t n = 0;
  std::size_t run = 0;
  for (std::size_t i = 0; i < s.words.size(); ++i) {
    if (!is_content(s.words[i])) {
      if (run >= 3) ++n;
      run = 0;
      continue;
    }
    const bool continues = run > 0 && s.word_token[i] == s.word_token[i - 1] + 1 &&
                           s.words[i][0] == s.words[i - 1][0];
    if (continues) {
      ++run;
    } else {
      if (run >= 3) ++n;
      run = 1;
    }
  }
  if (run >= 3) ++n;
  return n;
}

/// Distinct content words used three or more times in the sentence.
std::size_t repetition(const Sentence& s) {
  std::map<std::string, std::size_t> freq;
  for (const auto& w : s.words) {
    if (is_content(w)) ++freq[w];
  }
  return static_cast<std::size_t>(
      std::count_if(freq.begin(), freq.end(), [](const auto& kv) { return kv.second >= 3; }));
}

/// A non-human subject followed within two words by a human action.
std::size_t personification(const Sentence& s, const Keywords& kw) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.words.size()) {
    const std::size_t len = kw.nonhuman_subjects.match_at(s.words, i);
    if (len == 0) {
      ++i;
      continue;
    }
    bool hit = false;
    for (std::size_t j = i + len; j < std::min(s.words.size(), i + len + 2) && !hit; ++j) {
      if (const std::size_t a = kw.human_actions.match_at(s.words, j); a > 0) {
        hit = true;
        ++n;
        i = j + a;
      }
    }
    if (!hit) i += len;
  }
  return n;
}

/// Tone-shift markers at the start of the sentence or right after a clause
/// break. Opening quotes are ignored when looking back.
std::size_t tone_shifts(const SegmentedText& seg, const Sentence& s, const Keywords& kw) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.words.size()) {
    const std::size_t len = kw.tone_shifts.match_at(s.words, i);
    if (len == 0) {
      ++i;
      continue;
    }
    std::size_t t = s.word_token[i];
    while (t > s.tokens.begin && seg.tokens[t - 1].is_punct() &&
           kQuotes.contains(seg.tokens[t - 1].surface)) {
      --t;
    }
    const bool clause_start =
        t == s.tokens.begin ||
        (seg.tokens[t - 1].is_punct() && kClauseBreaks.contains(seg.tokens[t - 1].surface));
    if (clause_start) {
      ++n;
      i += len;
    } else {
      ++i;
    }
  }
  return n;
}

bool is_ironic(const Sentence& s, const Keywords& kw) {
  if (kw.irony_markers.any(s.words)) return true;
  return kw.contrast_markers.any(s.words) && kw.positive_terms.any(s.words) &&
         kw.negative_terms.any(s.words);
}

/// "not only ... but" and "neither ... nor" inside one sentence.
std::size_t rhetorical_devices(const Sentence& s) {
  std::size_t n = 0;
  const auto& w = s.words;
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::string closer;
    std::size_t from = i + 1;
    if (w[i] == "not" && i + 1 < w.size() && w[i + 1] == "only") {
      closer = "but";
      from = i + 2;
    } else if (w[i] == "neither") {
      closer = "nor";
    } else {
      continue;
    }
    const auto it = std::find(w.begin() + static_cast<long>(from), w.end(), closer);
    if (it != w.end()) {
      ++n;
      i = static_cast<std::size_t>(it - w.begin());
    }
  }
  return n;
}

std::map<std::string, std::size_t> zeros(const std::vector<std::string>& names) {
  std::map<std::string, std::size_t> m;
  for (const auto& n : names) m[n] = 0;
  return m;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open curriculum list " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& feature_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    const std::vector<std::pair<std::string, const std::vector<std::string>*>> stages = {
        {"ks2", &kKs2}, {"ks3", &kKs3}, {"ks4", &kKs4}, {"ks5", &kKs5}};
    for (const auto& [prefix, names] : stages) {
      for (const auto& n : *names) k.push_back(prefix + "." + n);
    }
    return k;
  }();
  return keys;
}

Counts Counts::zero() {
  Counts c;
  for (const auto& k : feature_keys()) c.values[k] = 0;
  return c;
}

std::size_t Counts::at(std::string_view key) const {
  const auto it = values.find(std::string(key));
  if (it == values.end()) throw ValidationError("unknown curriculum feature " + std::string(key));
  return it->second;
}

Counts& Counts::operator+=(const Counts& other) {
  for (const auto& [k, v] : other.values) values[k] += v;
  return *this;
}

nlohmann::json Counts::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& k : feature_keys()) {
    const auto it = values.find(k);
    j[k] = it == values.end() ? 0 : it->second;
  }
  return j;
}

PhraseList::PhraseList(const std::vector<std::string>& phrases) {
  std::unordered_set<std::string> seen;
  for (const auto& p : phrases) {
    std::istringstream in(textseg::to_lower(p));
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    if (words.empty()) continue;
    std::string key;
    for (const auto& w : words) key += w + " ";
    if (!seen.insert(key).second) continue;
    by_first_[words.front()].push_back(std::move(words));
    ++size_;
  }
  for (auto& [first, list] : by_first_) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
  }
}

std::size_t PhraseList::match_at(const std::vector<std::string>& words, std::size_t i) const {
  if (i >= words.size()) return 0;
  const auto it = by_first_.find(words[i]);
  if (it == by_first_.end()) return 0;
  for (const auto& phrase : it->second) {
    if (i + phrase.size() > words.size()) continue;
    if (std::equal(phrase.begin(), phrase.end(), words.begin() + static_cast<long>(i))) {
      return phrase.size();
    }
  }
  return 0;
}

std::size_t PhraseList::count(const std::vector<std::string>& words) const {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < words.size()) {
    const std::size_t len = match_at(words, i);
    if (len > 0) {
      ++n;
      i += len;
    } else {
      ++i;
    }
  }
  return n;
}

bool PhraseList::any(const std::vector<std::string>& words) const {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (match_at(words, i) > 0) return true;
  }
  return false;
}

PhraseList load_phrase_list(const std::filesystem::path& path) {
  return PhraseList(read_lines(path));
}

Keywords Keywords::load(const std::filesystem::path& dir) {
  Keywords k;
  const auto f = [&](const char* stage, const char* name) {
    return load_phrase_list(dir / stage / (std::string(name) + ".txt"));
  };
  k.narrative_indicators = f("ks2", "narrative_indicators");
  k.coordinators = f("ks2", "coordinators");
  k.subordinators = f("ks3", "subordinators");
  k.summarizing_indicators = f("ks3", "summarizing_indicators");
  k.implied_meaning = f("ks3", "implied_meaning");
  k.like_verb_cues = f("ks3", "like_verb_cues");
  k.evaluative_language = f("ks4", "evaluative_language");
  k.tone_shifts = f("ks4", "tone_shifts");
  k.human_actions = f("ks4", "human_actions");
  k.nonhuman_subjects = f("ks4", "nonhuman_subjects");
  k.advanced_inference = f("ks5", "advanced_inference");
  k.critical_analysis = f("ks5", "critical_analysis");
  k.irony_markers = f("ks5", "irony_markers");
  k.contrast_markers = f("ks5", "contrast_markers");
  k.positive_terms = f("ks5", "positive_terms");
  k.negative_terms = f("ks5", "negative_terms");
  return k;
}

std::map<std::string, std::size_t> detect_ks2(const SegmentedText& seg, const Tags& tags,
                                              const Keywords& kw) {
  auto m = zeros(kKs2);
  for (const auto& s : sentences_of(seg, tags)) {
    if (!s.words.empty() && s.words.size() <= 10) ++m["simple_sentences"];
    if (is_compound(s, kw)) ++m["compound_sentences"];
    m["basic_punctuation"] += basic_punctuation(seg, s);
    if (has_quote(seg, s)) ++m["dialogue"];
    m["narrative_indicators"] += kw.narrative_indicators.count(s.words);
  }
  return m;
}

std::map<std::string, std::size_t> detect_ks3(const SegmentedText& seg, const Tags& tags,
                                              const Keywords& kw) {
  auto m = zeros(kKs3);
  for (const auto& s : sentences_of(seg, tags)) {
    if (is_complex(s, kw)) ++m["complex_sentences"];
    m["advanced_punctuation"] += advanced_punctuation(seg, s);
    m["summarizing_indicators"] += kw.summarizing_indicators.count(s.words);
    m["implied_meaning"] += kw.implied_meaning.count(s.words);
    m["similes"] += similes(s, kw);
    m["alliteration"] += alliteration(s);
  }
  return m;
}

std::map<std::string, std::size_t> detect_ks4(const SegmentedText& seg, const Tags& tags,
                                              const Keywords& kw) {
  auto m = zeros(kKs4);
  for (const auto& s : sentences_of(seg, tags)) {
    if (is_compound(s, kw) && is_complex(s, kw)) ++m["compound_complex_sentences"];
    m["sophisticated_punctuation"] += sophisticated_punctuation(seg, s);
    m["evaluative_language"] += kw.evaluative_language.count(s.words);
    m["repetition"] += repetition(s);
    m["personification"] += personification(s, kw);
    m["tone_shifts"] += tone_shifts(seg, s, kw);
  }
  return m;
}

std::map<std::string, std::size_t> detect_ks5(const SegmentedText& seg, const Tags& tags,
                                              const Keywords& kw) {
  auto m = zeros(kKs5);
  for (const auto& s : sentences_of(seg, tags)) {
    m["advanced_inference"] += kw.advanced_inference.count(s.words);
    m["critical_analysis"] += kw.critical_analysis.count(s.words);
    if (is_ironic(s, kw)) ++m["irony"];
    m["rhetorical_devices"] += rhetorical_devices(s);
  }
  return m;
}

Counts count_features(const SegmentedText& seg, const Keywords& kw) {
  const Tags tags = lexicons::tag_pos(seg);
  Counts c;
  const auto add = [&](const char* prefix, const std::map<std::string, std::size_t>& m) {
    for (const auto& [k, v] : m) c.values[std::string(prefix) + "." + k] = v;
  };
  add("ks2", detect_ks2(seg, tags, kw));
  add("ks3", detect_ks3(seg, tags, kw));
  add("ks4", detect_ks4(seg, tags, kw));
  add("ks5", detect_ks5(seg, tags, kw));
  return c;
}

Counts count_features(std::string_view text, const Keywords& kw) {
  return count_features(textseg::segment(text), kw);
}

}  // namespace keystage::curriculum
