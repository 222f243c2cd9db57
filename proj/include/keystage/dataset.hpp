#pragma once

// Chunk-level corpus ingestion, Lexile banding and per-class balanced splits.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "keystage/key_stage.hpp"

namespace keystage::dataset {

/// Lexile band to Key Stage. Scores below 400 map to KS1, which has no
/// class index. Throws ValidationError for score <= 0.
KeyStage map_lexile(int score);

struct LabeledChunk {
  std::string book_id;
  std::string text;
  std::optional<int> lexile;
  KeyStage key_stage = KeyStage::KS2;
  std::string chunk_id;  // optional column; empty when absent
  std::size_t line = 0;  // first physical line of the record, 1-based

  bool operator==(const LabeledChunk& o) const {
    return book_id == o.book_id && text == o.text && lexile == o.lexile &&
           key_stage == o.key_stage && chunk_id == o.chunk_id;
  }
};

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF
/// or LF endings, optional UTF-8 BOM. Unterminated quotes throw
/// ValidationError naming the line where the field opened.
std::vector<CsvRecord> read_csv(std::istream& in);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Columns book_id, text, lexile, key_stage are required (any order, extra
/// columns ignored); chunk_id is optional. lexile may be blank. A blank
/// key_stage is derived from lexile. Errors carry the offending line.
std::vector<LabeledChunk> ingest_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<LabeledChunk> ingest_csv(const std::filesystem::path& path);

void write_chunks_csv(std::ostream& out, const std::vector<LabeledChunk>& rows);

struct SplitOptions {
  std::size_t per_class_cap = 5000;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  /// Keep every sampled chunk of a book on one side of the split. Class
  /// counts then follow whole books and are no longer exact.
  bool group_by_book = false;
};

struct SplitDataset {
  std::vector<LabeledChunk> train;
  std::vector<LabeledChunk> test;
  std::uint64_t seed = 0;
  std::size_t per_class_cap = 0;
  double train_fraction = 0.0;
};

/// round(cap * fraction), the per-class training count.
std::size_t train_count(std::size_t cap, double fraction);

/// Per class: shuffle the row indices with a generator seeded from
/// (seed, class), keep the first `cap`, put the first train_count of those
/// in train. Output is ordered by class then draw order.
SplitDataset balance_and_split(const std::vector<LabeledChunk>& rows, const SplitOptions& opts);

std::array<std::size_t, kNumClasses> class_counts(const std::vector<LabeledChunk>& rows);

}  // namespace keystage::dataset
