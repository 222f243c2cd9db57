#pragma once

// Tokenization, sentence/paragraph segmentation, syllable estimation and
// sentence-aligned chunking. Every function here is pure.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace keystage::textseg {

inline constexpr std::size_t kDefaultTokenBudget = 512;

enum class TokenKind { Word, Punctuation, Other };

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::Other;
  /// Letters and digits in the surface; apostrophes and hyphens excluded.
  std::size_t char_count = 0;
  /// Estimated syllables; 0 for anything that is not a word.
  std::size_t syllables = 0;
  /// Byte offsets [begin, end) into the text that was tokenized.
  std::size_t begin = 0;
  std::size_t end = 0;
  /// Number of '\n' in the whitespace gap before this token. Two or more
  /// means a blank line, i.e. a paragraph break.
  std::size_t newlines_before = 0;
  /// True when whitespace (or the start of text) precedes the token.
  bool space_before = true;

  bool is_word() const { return kind == TokenKind::Word; }
  bool is_punct() const { return kind == TokenKind::Punctuation; }
};

/// Half-open index range.
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct SegmentedText {
  std::vector<Token> tokens;
  /// Token-index ranges, disjoint, ordered, covering every token.
  std::vector<Range> sentences;
  /// Sentence-index ranges, disjoint, ordered, covering every sentence.
  std::vector<Range> paragraphs;
  /// Byte offsets of the covered text in the original document.
  Range source_span;

  std::size_t word_count() const;
  bool empty() const { return tokens.empty(); }
};

struct Chunk {
  SegmentedText segmented;
  std::size_t index = 0;
  std::size_t token_budget = kDefaultTokenBudget;
  /// Set when the chunk is a single sentence longer than the budget.
  bool oversized = false;
  /// Verbatim document text of source_span (includes trailing whitespace).
  std::string text;
};

std::vector<Token> tokenize(std::string_view text);

std::vector<Range> split_sentences(const std::vector<Token>& tokens);

/// Vowel-group syllable estimate, never less than 1. Hyphenated words are
/// the sum of their parts.
std::size_t count_syllables(std::string_view word);

/// tokenize + split_sentences + paragraph grouping for a whole text.
SegmentedText segment(std::string_view text);

/// Greedy accumulation of whole sentences into chunks of at most
/// `token_budget` word+punctuation tokens. Chunk source spans tile the text.
std::vector<Chunk> chunk_document(std::string_view text,
                                  std::size_t token_budget = kDefaultTokenBudget);

/// Word and punctuation tokens in a sentence; what the budget counts.
std::size_t budget_tokens(const SegmentedText& seg, const Range& sentence);

/// Number of tokens forming an ellipsis that starts at tokens[i]: 1 for
/// U+2026, the run length for three or more adjacent "." tokens, else 0.
std::size_t ellipsis_length(const std::vector<Token>& tokens, std::size_t i);

/// 64-bit FNV-1a of the bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Stable chunk identifier "<index>-<16 hex digits of fnv1a64(text)>", the key
/// shared with embedding files.
std::string chunk_id(const Chunk& chunk);

/// ASCII lower-casing; other bytes pass through.
std::string to_lower(std::string_view s);

/// Text from the first to the last token of `seg`, verbatim.
std::string_view covered_text(std::string_view document, const SegmentedText& seg);

}  // namespace keystage::textseg
