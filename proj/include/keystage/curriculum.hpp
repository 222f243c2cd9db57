#pragma once

// Counts of KS2-KS5 curriculum language features. Every detector is a
// sentence-local rule over word tokens, punctuation tokens and the tagger's
// part-of-speech tags, so counts over a document equal the sum over chunks
// that break at sentence boundaries.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "keystage/lexicons.hpp"
#include "keystage/textseg.hpp"

namespace keystage::curriculum {

inline constexpr std::string_view kSchemaVersion = "keystage-curriculum/1";

/// Flat keys "ks<N>.<feature>" in a fixed order.
const std::vector<std::string>& feature_keys();

struct Counts {
  std::map<std::string, std::size_t> values;

  /// All keys present, all zero.
  static Counts zero();
  std::size_t at(std::string_view key) const;
  Counts& operator+=(const Counts& other);
  friend bool operator==(const Counts&, const Counts&) = default;

  /// {"ks2.simple_sentences": n, ...}
  nlohmann::json to_json() const;
};

/// Case-insensitive multi-word phrases matched over the word tokens of a
/// sentence; punctuation between words is skipped.
class PhraseList {
 public:
  PhraseList() = default;
  explicit PhraseList(const std::vector<std::string>& phrases);

  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }

  /// Length in words of the longest phrase starting at words[i], or 0.
  std::size_t match_at(const std::vector<std::string>& words, std::size_t i) const;
  /// Leftmost-longest, non-overlapping matches.
  std::size_t count(const std::vector<std::string>& words) const;
  bool any(const std::vector<std::string>& words) const;

 private:
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first_;
  std::size_t size_ = 0;
};

PhraseList load_phrase_list(const std::filesystem::path& path);

struct Keywords {
  // ks2
  PhraseList narrative_indicators;
  PhraseList coordinators;
  // ks3
  PhraseList subordinators;
  PhraseList summarizing_indicators;
  PhraseList implied_meaning;
  PhraseList like_verb_cues;  // words before "like" that make it a verb
  // ks4
  PhraseList evaluative_language;
  PhraseList tone_shifts;
  PhraseList human_actions;
  PhraseList nonhuman_subjects;
  // ks5
  PhraseList advanced_inference;
  PhraseList critical_analysis;
  PhraseList irony_markers;
  PhraseList contrast_markers;
  PhraseList positive_terms;
  PhraseList negative_terms;

  /// Reads `<dir>/ks{2..5}/<list>.txt`; every file must exist.
  static Keywords load(const std::filesystem::path& dir);
};

/// Tags from lexicons::tag_pos, aligned to the word tokens of `seg`.
using Tags = std::vector<lexicons::PosTag>;

std::map<std::string, std::size_t> detect_ks2(const textseg::SegmentedText& seg, const Tags& tags,
                                              const Keywords& kw);
std::map<std::string, std::size_t> detect_ks3(const textseg::SegmentedText& seg, const Tags& tags,
                                              const Keywords& kw);
std::map<std::string, std::size_t> detect_ks4(const textseg::SegmentedText& seg, const Tags& tags,
                                              const Keywords& kw);
std::map<std::string, std::size_t> detect_ks5(const textseg::SegmentedText& seg, const Tags& tags,
                                              const Keywords& kw);

/// Tags `seg` and runs all four detectors.
Counts count_features(const textseg::SegmentedText& seg, const Keywords& kw);
Counts count_features(std::string_view text, const Keywords& kw);

}  // namespace keystage::curriculum
