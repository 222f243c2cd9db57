#pragma once

// Fixed-length linguistic feature vector: basic counts, sentence averages,
// lexical diversity, readability formulas, POS-based structure, word usage,
// punctuation style, sentiment, emotion and named-entity counts.

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "keystage/lexicons.hpp"
#include "keystage/textseg.hpp"

namespace keystage::lingfeat {

inline constexpr std::string_view kSchemaVersion = "keystage-features/1";

struct NamedValue {
  std::string name;
  double value = 0.0;
};
using NamedValues = std::vector<NamedValue>;

/// Look up a value by name; throws ValidationError if absent.
double value_of(const NamedValues& values, std::string_view name);

struct DiversityMetrics {
  double ttr = 0.0;
  double yule_k = 0.0;
  double simpson_d = 0.0;
  double herdan_c = 0.0;
  double brunet_w = 0.0;
  double honore_r = 0.0;
};

struct ReadabilityScores {
  double kincaid = 0.0;
  double ari = 0.0;
  double coleman_liau = 0.0;
  double flesch = 0.0;
  double gunning_fog = 0.0;
  double lix = 0.0;
  double smog = 0.0;
  double rix = 0.0;
  double dale_chall = 0.0;
};

/// Operands shared by the readability formulas. Sentences and paragraphs
/// only count when they hold at least one word.
struct TextCounts {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t paragraphs = 0;
  std::size_t unique_words = 0;
  std::size_t characters = 0;
  std::size_t syllables = 0;
  std::size_t long_words = 0;       // more than 6 characters
  std::size_t complex_words = 0;    // 3+ syllables
  std::size_t polysyllables = 0;    // 3+ syllables
  std::size_t difficult_words = 0;  // not familiar, nor an inflection of a familiar word
};

/// Case-folded word surfaces in document order.
std::vector<std::string> lower_words(const textseg::SegmentedText& seg);

/// True when `lower` is neither on the familiar-word list nor a regular
/// inflection (-s, -es, -ies, -ed, -ied, -ing, -er, -est, 's) of a listed word.
/// Tokens with no letters are never difficult.
bool is_difficult(std::string_view lower, const lexicons::WordList& familiar);

TextCounts count_operands(const textseg::SegmentedText& seg, const lexicons::WordList& familiar);

NamedValues basic_metrics(const textseg::SegmentedText& seg);
NamedValues sentence_info(const textseg::SegmentedText& seg, const lexicons::WordList& familiar);

DiversityMetrics diversity(std::span<const std::string> words_lower);
DiversityMetrics diversity(const textseg::SegmentedText& seg);

ReadabilityScores readability(const TextCounts& counts);
ReadabilityScores readability(const textseg::SegmentedText& seg,
                              const lexicons::WordList& familiar);

NamedValues sentence_structure(const textseg::SegmentedText& seg,
                               const std::vector<lexicons::PosTag>& tags);
NamedValues word_usage(const textseg::SegmentedText& seg,
                       const std::vector<lexicons::PosTag>& tags);
NamedValues punctuation_style(const textseg::SegmentedText& seg,
                              const std::vector<lexicons::PosTag>& tags);
/// polarity, subjectivity and the eight emotion scores.
NamedValues sentiment_emotion(const textseg::SegmentedText& seg,
                              const lexicons::AffectLexicon& affect);
NamedValues named_entities(const textseg::SegmentedText& seg,
                           const lexicons::Gazetteer& gazetteer);

struct FeatureSpec {
  std::string name;
  std::string category;
  std::string formula;
};

/// Ordered feature schema for kSchemaVersion.
const std::vector<FeatureSpec>& schema();
std::vector<std::string> feature_names();
nlohmann::json schema_json();

struct FeatureVector {
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

/// Every category, concatenated in schema order. Throws
/// DegenerateInputError when the text has no words.
FeatureVector extract_features(const textseg::SegmentedText& seg,
                               const lexicons::Lexicons& lex);

/// Same as extract_features but keeps the names, for CSV output and tests.
NamedValues extract_named(const textseg::SegmentedText& seg, const lexicons::Lexicons& lex);

}  // namespace keystage::lingfeat
