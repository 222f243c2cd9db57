#pragma once

// Educator-facing aggregation of per-chunk predictions: Key Stage
// distribution, confidence-weighted overall score, reading age, difficulty
// series, key vocabulary, curriculum counts and extreme excerpts.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "keystage/curriculum.hpp"
#include "keystage/fusion.hpp"
#include "keystage/lexicons.hpp"
#include "keystage/prediction.hpp"
#include "keystage/textseg.hpp"

namespace keystage::report {

inline constexpr std::string_view kReportSchemaVersion = "keystage-report/1";
inline constexpr std::size_t kDefaultVocabularySize = 10;

/// Fraction of chunks per label, in class order KS2..KS5.
std::array<double, kNumClasses> distribution(std::span<const ChunkPrediction> predictions);

/// sum(KS_j * C_j) / sum(C_j).
double overall_score(std::span<const ChunkPrediction> predictions);

/// Expected Key Stage value under the chunk's probabilities.
double chunk_difficulty(const ChunkPrediction& prediction);

struct ReadingAge {
  KeyStage stage = KeyStage::KS2;
  int min_age = 0;
  int max_age = 0;
  std::string text;
};

/// Nearest stage with halves rounding up; score must lie in [2, 5].
ReadingAge reading_age(double overall_score);

struct VocabularyItem {
  std::string token;
  double importance = 0.0;
  std::size_t occurrences = 0;
};

struct Vocabulary {
  std::vector<VocabularyItem> items;
  /// True when importance is confidence-weighted term frequency because
  /// attention was not available for every chunk.
  bool fallback = false;
};

/// What top_vocabulary needs to know about one chunk.
struct ChunkWords {
  const textseg::SegmentedText* segmented = nullptr;
  double confidence = 0.0;
  /// Per-word aggregated attention from the embedder, if any.
  const std::vector<fusion::AttentionWeight>* attention = nullptr;
};

/// Tokens found (case-insensitively) in either list. With attention on every
/// chunk, importance is the mean attention over a token's occurrences.
/// Otherwise it is sum_j C_j * count_j(t) / words_j. Sorted by importance
/// descending, ties alphabetical, at most k.
Vocabulary top_vocabulary(std::span<const ChunkWords> chunks, const lexicons::WordList& oxford,
                          const lexicons::WordList& awl, std::size_t k = kDefaultVocabularySize);

struct Extremes {
  std::size_t most_complex = 0;
  std::size_t least_complex = 0;
};

/// Highest label with the highest confidence, and lowest label with the
/// highest confidence. Earlier chunks win ties.
Extremes extreme_excerpts(std::span<const ChunkPrediction> predictions);

struct ChunkReport {
  ChunkPrediction prediction;
  double difficulty = 0.0;
  textseg::Range span;  // byte offsets of the excerpt in the input text
  std::string text;     // verbatim excerpt
  bool oversized = false;
};

struct AnalysisReport {
  std::array<double, kNumClasses> distribution{};
  double overall_score = 0.0;
  ReadingAge recommendation;
  std::vector<ChunkReport> chunks;
  Vocabulary vocabulary;
  curriculum::Counts curriculum;
  Extremes extremes;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// Everything build_report consumes.
struct ReportInput {
  std::span<const textseg::Chunk> chunks;
  std::span<const ChunkPrediction> predictions;
  /// Parallel to chunks; entries may be null.
  std::span<const std::vector<fusion::AttentionWeight>* const> attention;
  const lexicons::Lexicons* lexicons = nullptr;
  curriculum::Counts curriculum;
  std::vector<std::string> warnings;
  std::string_view document;
};

AnalysisReport build_report(const ReportInput& input);

/// JSON Schema (draft 2020-12) for AnalysisReport::to_json.
nlohmann::json report_schema();

}  // namespace keystage::report
