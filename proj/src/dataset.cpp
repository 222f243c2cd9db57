#include "keystage/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>

#include "keystage/errors.hpp"
#include "keystage/rng.hpp"
#include "keystage/textseg.hpp"

namespace keystage::dataset {

KeyStage map_lexile(int score) {
  if (score <= 0) throw ValidationError("lexile score must be positive, got " + std::to_string(score));
  if (score < 400) return KeyStage::KS1;
  if (score <= 800) return KeyStage::KS2;
  if (score <= 1000) return KeyStage::KS3;
  if (score <= 1200) return KeyStage::KS4;
  return KeyStage::KS5;
}

std::vector<CsvRecord> read_csv(std::istream& in) {
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::size_t i = 0;
  if (data.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;

  std::vector<CsvRecord> records;
  std::size_t line = 1;
  CsvRecord current;
  current.line = line;
  std::string field;
  bool row_has_content = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    if (row_has_content || !current.fields.empty()) {
      end_field();
      records.push_back(std::move(current));
    }
    current = CsvRecord{};
    field.clear();
    row_has_content = false;
  };

  while (i < data.size()) {
    const char c = data[i];
    if (c == '"' && field.empty()) {
      const std::size_t opened = line;
      row_has_content = true;
      ++i;
      bool closed = false;
      while (i < data.size()) {
        const char q = data[i];
        if (q == '"') {
          if (i + 1 < data.size() && data[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        if (q == '\n') ++line;
        field += q;
        ++i;
      }
      if (!closed) {
        throw ValidationError("line " + std::to_string(opened) + ": unterminated quoted field");
      }
      if (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
        throw ValidationError("line " + std::to_string(line) +
                              ": unexpected character after closing quote");
      }
      continue;
    }
    if (c == ',') {
      row_has_content = true;
      end_field();
      ++i;
      continue;
    }
    if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      ++i;
      end_row();
      ++line;
      current.line = line;
      continue;
    }
    row_has_content = true;
    field += c;
    ++i;
  }
  end_row();
  return records;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k > 0) out << ',';
    const std::string& f = fields[k];
    const bool quote = f.find_first_of(",\"\r\n") != std::string::npos ||
                       (!f.empty() && (f.front() == ' ' || f.back() == ' '));
    if (!quote) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string at_line(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::vector<LabeledChunk> ingest_csv(std::istream& in, const std::string& source) {
  const auto records = read_csv(in);
  if (records.empty()) throw ValidationError(source + ": empty file");

  std::map<std::string, std::size_t> column;
  for (std::size_t k = 0; k < records[0].fields.size(); ++k) {
    column.emplace(textseg::to_lower(trim(records[0].fields[k])), k);
  }
  for (const char* required : {"book_id", "text", "lexile", "key_stage"}) {
    if (!column.count(required)) {
      throw ValidationError(source + ": missing required column '" + required + "'");
    }
  }
  const std::size_t c_book = column["book_id"], c_text = column["text"],
                    c_lexile = column["lexile"], c_stage = column["key_stage"];
  const auto c_chunk = column.count("chunk_id") ? std::optional(column["chunk_id"]) : std::nullopt;
  const std::size_t width = records[0].fields.size();

  std::vector<LabeledChunk> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = at_line(source, rec.line);
    if (rec.fields.size() != width) {
      throw ValidationError(where + "expected " + std::to_string(width) + " fields, found " +
                            std::to_string(rec.fields.size()));
    }
    LabeledChunk row;
    row.line = rec.line;
    row.book_id = rec.fields[c_book];
    row.text = rec.fields[c_text];
    if (c_chunk) row.chunk_id = rec.fields[*c_chunk];
    if (trim(row.text).empty()) throw ValidationError(where + "empty text");

    const std::string lex = trim(rec.fields[c_lexile]);
    if (!lex.empty()) {
      int value = 0;
      const auto [ptr, ec] = std::from_chars(lex.data(), lex.data() + lex.size(), value);
      if (ec != std::errc() || ptr != lex.data() + lex.size() || value <= 0) {
        throw ValidationError(where + "lexile '" + lex + "' is not a positive integer");
      }
      row.lexile = value;
    }

    const std::string label = trim(rec.fields[c_stage]);
    if (label.empty()) {
      if (!row.lexile) throw ValidationError(where + "neither key_stage nor lexile given");
      const KeyStage derived = map_lexile(*row.lexile);
      if (derived == KeyStage::KS1) {
        throw ValidationError(where + "lexile " + lex + " falls in KS1, which is not a class");
      }
      row.key_stage = derived;
    } else {
      const auto parsed = parse_class_label(label);
      if (!parsed) {
        throw ValidationError(where + "key_stage '" + label + "' is not one of KS2..KS5");
      }
      row.key_stage = *parsed;
      if (row.lexile && map_lexile(*row.lexile) != row.key_stage) {
        throw ValidationError(where + "lexile " + lex + " maps to " +
                              to_string(map_lexile(*row.lexile)) + " but key_stage is " +
                              label);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LabeledChunk> ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open " + path.string());
  return ingest_csv(in, path.string());
}

void write_chunks_csv(std::ostream& out, const std::vector<LabeledChunk>& rows) {
  const bool with_ids =
      std::any_of(rows.begin(), rows.end(), [](const auto& r) { return !r.chunk_id.empty(); });
  std::vector<std::string> header = {"book_id", "text", "lexile", "key_stage"};
  if (with_ids) header.push_back("chunk_id");
  write_csv_row(out, header);
  for (const auto& r : rows) {
    std::vector<std::string> f = {r.book_id, r.text, r.lexile ? std::to_string(*r.lexile) : "",
                                  to_string(r.key_stage)};
    if (with_ids) f.push_back(r.chunk_id);
    write_csv_row(out, f);
  }
}

std::size_t train_count(std::size_t cap, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(cap) * fraction));
}

std::array<std::size_t, kNumClasses> class_counts(const std::vector<LabeledChunk>& rows) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& r : rows) ++counts[class_index(r.key_stage)];
  return counts;
}

SplitDataset balance_and_split(const std::vector<LabeledChunk>& rows, const SplitOptions& opts) {
  if (opts.per_class_cap == 0) throw ValidationError("per-class cap must be positive");
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    by_class[class_index(rows[i].key_stage)].push_back(i);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (by_class[c].size() < opts.per_class_cap) {
      throw ValidationError("class " + to_string(stage_from_index(c)) + " has " +
                            std::to_string(by_class[c].size()) + " rows, fewer than the cap of " +
                            std::to_string(opts.per_class_cap));
    }
  }

  SplitDataset out;
  out.seed = opts.seed;
  out.per_class_cap = opts.per_class_cap;
  out.train_fraction = opts.train_fraction;
  const std::size_t n_train = train_count(opts.per_class_cap, opts.train_fraction);

  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(opts.seed, c));
    rng.shuffle(std::span<std::size_t>(idx));
    idx.resize(opts.per_class_cap);

    if (!opts.group_by_book) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        (k < n_train ? out.train : out.test).push_back(rows[idx[k]]);
      }
      continue;
    }
    // Books in order of first appearance in the draw; whole books go to
    // train while they fit.
    std::vector<std::string> books;
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i : idx) {
      auto& m = members[rows[i].book_id];
      if (m.empty()) books.push_back(rows[i].book_id);
      m.push_back(i);
    }
    std::size_t filled = 0;
    for (const auto& b : books) {
      const auto& m = members[b];
      const bool to_train = filled + m.size() <= n_train;
      if (to_train) filled += m.size();
      for (std::size_t i : m) (to_train ? out.train : out.test).push_back(rows[i]);
    }
  }
  return out;
}

}  // namespace keystage::dataset
