#pragma once

// Feature tables for labeled chunks: extraction over a dataset split and the
// CSV form the train, search, fuse and eval commands read.
//
// CSV layout: chunk_id,key_stage,<feature names in schema order>. Values are
// written in shortest round-trip form, so reading a table back is exact.

#include <iosfwd>
#include <string>
#include <vector>

#include "keystage/ann.hpp"
#include "keystage/dataset.hpp"
#include "keystage/fusion.hpp"
#include "keystage/lexicons.hpp"

namespace keystage::featureset {

/// The row's chunk_id column, else "<book_id>-<16 hex digits of fnv1a64(text)>".
std::string row_id(const dataset::LabeledChunk& row);

struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<KeyStage> labels;
  ann::Matrix x;  // rows follow ids
  /// Rows left out of extraction, one message each.
  std::vector<std::string> skipped;

  std::size_t size() const { return ids.size(); }
};

/// Features for every row that has words, in row order. Rows are split
/// across `threads` workers; the result does not depend on the count.
/// Throws ValidationError on duplicate ids.
FeatureTable extract_table(const std::vector<dataset::LabeledChunk>& rows,
                           const lexicons::Lexicons& lex, std::size_t threads = 1);

void write_csv(std::ostream& out, const FeatureTable& table);
void write_csv(const std::filesystem::path& path, const FeatureTable& table);

/// Requires the header to match this engine's feature schema exactly.
FeatureTable read_csv(std::istream& in, const std::string& source = "<stream>");
FeatureTable read_csv(const std::filesystem::path& path);

ann::Dataset to_dataset(const FeatureTable& table);
fusion::LabeledFeatures to_labeled(const FeatureTable& table);

}  // namespace keystage::featureset
