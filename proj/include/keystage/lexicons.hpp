#pragma once

// Word lists, affect lexicon, rule-cascade part-of-speech tagger and
// gazetteer NER. Everything loaded here is immutable after construction.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "keystage/textseg.hpp"

namespace keystage::lexicons {

class WordList {
 public:
  WordList() = default;
  WordList(std::string name, std::unordered_set<std::string> entries);

  const std::string& name() const { return name_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  /// Case-insensitive.
  bool contains(std::string_view word) const;
  const std::unordered_set<std::string>& entries() const { return entries_; }

  /// Adds every member of each family line ("head: member member ...").
  void expand_families(const std::filesystem::path& path);

  friend bool operator==(const WordList&, const WordList&) = default;

 private:
  std::string name_;
  std::unordered_set<std::string> entries_;
};

/// One entry per line; lowercased, deduplicated, blank lines and lines
/// starting with '#' skipped.
WordList load_word_list(const std::filesystem::path& path, std::string name);

enum class Emotion { Fear, Anger, Anticipation, Trust, Surprise, Sadness, Disgust, Joy };
inline constexpr std::size_t kNumEmotions = 8;
inline constexpr std::array<Emotion, kNumEmotions> kEmotions = {
    Emotion::Fear,    Emotion::Anger,   Emotion::Anticipation, Emotion::Trust,
    Emotion::Surprise, Emotion::Sadness, Emotion::Disgust,      Emotion::Joy};
std::string_view to_string(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view name);

struct AffectEntry {
  double polarity = 0.0;      // [-1, 1]
  double subjectivity = 0.0;  // [0, 1]
  std::array<bool, kNumEmotions> emotions{};
};

class AffectLexicon {
 public:
  AffectLexicon() = default;
  explicit AffectLexicon(std::unordered_map<std::string, AffectEntry> entries);

  /// Case-insensitive; nullptr when absent.
  const AffectEntry* find(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, AffectEntry> entries_;
};

/// TSV: word<TAB>polarity<TAB>subjectivity<TAB>emotion,emotion,...
/// The emotion column may be empty or absent.
AffectLexicon load_affect_lexicon(const std::filesystem::path& path);

enum class PosTag { VB, VBP, VBZ, VBD, VBN, VBG, NN, PRP, IN, CC, DT, WH, OTHER };
std::string_view to_string(PosTag tag);

/// Closed-class vocabularies shared by the tagger and the feature extractors.
namespace closed_class {
bool is_determiner(std::string_view lower);
bool is_article(std::string_view lower);
bool is_pronoun(std::string_view lower);
bool is_preposition(std::string_view lower);
bool is_coordinator(std::string_view lower);
bool is_subordinator(std::string_view lower);
bool is_interrogative(std::string_view lower);
bool is_modal(std::string_view lower);
bool is_auxiliary(std::string_view lower);
/// Union of the lists above plus common particles and negation.
bool is_function_word(std::string_view lower);
}  // namespace closed_class

/// Deterministic rule cascade: closed-class lookup, irregular verb forms,
/// context rules (modal/"to" + verb, have/be + -ed), suffix rules, NN default.
/// Context never crosses a sentence boundary.
std::vector<PosTag> tag_pos(const textseg::SegmentedText& segmented);

/// True when `lower` is a base verb the tagger knows.
bool is_known_verb(std::string_view lower);

inline constexpr std::array<std::string_view, 11> kNerLabels = {
    "PERSON", "NORP", "FAC",     "ORG", "GPE",     "LOC",
    "PRODUCT", "EVENT", "WORK_OF_ART", "LAW", "LANGUAGE"};

/// Per-label entity names, matched longest-first on word sequences.
class Gazetteer {
 public:
  Gazetteer() = default;
  void add(std::string_view label, std::string_view entry);
  /// Reads `<dir>/<LABEL>.txt` for every label; missing files are empty.
  static Gazetteer load(const std::filesystem::path& dir);

  /// Label of the longest entry starting at word `i` of `words_lower`, and
  /// its length in words; nullopt when nothing matches.
  std::optional<std::pair<std::string_view, std::size_t>> match(
      const std::vector<std::string>& words_lower, std::size_t i) const;
  std::optional<std::string_view> label_of(std::string_view lower_single) const;

 private:
  // first word -> (entry words, label index)
  std::unordered_map<std::string, std::vector<std::pair<std::vector<std::string>, std::size_t>>>
      by_first_;
  std::size_t max_words_ = 0;
};

/// Gazetteer hits (capitalized in text) plus a PERSON heuristic for runs of
/// two or more capitalized open-class words and honorific + name.
std::map<std::string, std::size_t> ner_counts(const textseg::SegmentedText& segmented,
                                              const Gazetteer& gazetteer);

/// Paths of every injectable resource. Keys mirror the config file.
struct ResourcePaths {
  std::filesystem::path oxford3000;
  std::filesystem::path awl;
  std::filesystem::path awl_families;  // optional
  std::filesystem::path dale_chall;
  std::filesystem::path affect;
  std::filesystem::path gazetteer_dir;
  std::filesystem::path curriculum_dir;
  std::filesystem::path demos_dir;

  /// Standard layout under a resources root.
  static ResourcePaths under(const std::filesystem::path& root);
  /// Compiled-in default root, overridable with KEYSTAGE_RESOURCES.
  static std::filesystem::path default_root();
};

/// Every lexical resource the extractors need, loaded once and shared.
struct Lexicons {
  WordList oxford3000;
  WordList awl;
  WordList dale_chall;
  AffectLexicon affect;
  Gazetteer gazetteer;

  static Lexicons load(const ResourcePaths& paths);
};

}  // namespace keystage::lexicons
