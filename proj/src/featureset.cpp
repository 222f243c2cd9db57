#include "keystage/featureset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "keystage/errors.hpp"
#include "keystage/lingfeat.hpp"
#include "keystage/textseg.hpp"

namespace keystage::featureset {

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ValidationError("cannot format feature value");
  return std::string(buf, end);
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ValidationError(where + "not a finite number: '" + s + "'");
  }
  return v;
}

}  // namespace

std::string row_id(const dataset::LabeledChunk& row) {
  if (!row.chunk_id.empty()) return row.chunk_id;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(textseg::fnv1a64(row.text)));
  return row.book_id + "-" + hex;
}

FeatureTable extract_table(const std::vector<dataset::LabeledChunk>& rows,
                           const lexicons::Lexicons& lex, std::size_t threads) {
  const std::size_t dim = lingfeat::feature_names().size();
  std::vector<std::vector<double>> values(rows.size());
  std::vector<std::string> errors(rows.size());
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto seg = textseg::segment(rows[i].text);
      if (seg.word_count() == 0) {
        errors[i] = "no words";
        continue;
      }
      values[i] = lingfeat::extract_features(seg, lex).values;
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, rows.size()));
  if (threads == 1) {
    work(0, rows.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t step = (rows.size() + threads - 1) / threads;
    for (std::size_t b = 0; b < rows.size(); b += step) {
      pool.emplace_back(work, b, std::min(rows.size(), b + step));
    }
    for (auto& t : pool) t.join();
  }

  FeatureTable out;
  std::set<std::string> seen;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string id = row_id(rows[i]);
    if (!seen.insert(id).second) throw ValidationError("duplicate chunk id '" + id + "'");
    if (!errors[i].empty()) {
      out.skipped.push_back(id + ": " + errors[i]);
      continue;
    }
    if (rows[i].key_stage == KeyStage::KS1) {
      out.skipped.push_back(id + ": KS1 is not a class");
      continue;
    }
    out.ids.push_back(id);
    out.labels.push_back(rows[i].key_stage);
    kept.push_back(i);
  }
  out.x.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    for (std::size_t k = 0; k < dim; ++k) {
      out.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = values[kept[r]][k];
    }
  }
  return out;
}

void write_csv(std::ostream& out, const FeatureTable& table) {
  std::vector<std::string> header = {"chunk_id", "key_stage"};
  for (auto& n : lingfeat::feature_names()) header.push_back(std::move(n));
  dataset::write_csv_row(out, header);
  std::vector<std::string> fields;
  for (std::size_t r = 0; r < table.size(); ++r) {
    fields.assign({table.ids[r], to_string(table.labels[r])});
    for (Eigen::Index k = 0; k < table.x.cols(); ++k) {
      fields.push_back(format_double(table.x(static_cast<Eigen::Index>(r), k)));
    }
    dataset::write_csv_row(out, fields);
  }
}

void write_csv(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + path.string());
  write_csv(out, table);
  if (!out) throw ResourceError("error writing " + path.string());
}

FeatureTable read_csv(std::istream& in, const std::string& source) {
  const auto records = dataset::read_csv(in);
  if (records.empty()) throw ValidationError(source + ": empty feature table");
  const auto names = lingfeat::feature_names();
  const auto& header = records.front().fields;
  if (header.size() != names.size() + 2 || header[0] != "chunk_id" || header[1] != "key_stage" ||
      !std::equal(names.begin(), names.end(), header.begin() + 2)) {
    throw ValidationError(source + ": header does not match feature schema " +
                          std::string(lingfeat::kSchemaVersion));
  }
  FeatureTable t;
  t.x.resize(static_cast<Eigen::Index>(records.size() - 1), static_cast<Eigen::Index>(names.size()));
  std::set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const std::string where = source + ":" + std::to_string(records[r].line) + ": ";
    if (f.size() != header.size()) throw ValidationError(where + "wrong number of fields");
    const auto label = parse_class_label(f[1]);
    if (!label) throw ValidationError(where + "bad key_stage '" + f[1] + "'");
    if (!seen.insert(f[0]).second) throw ValidationError(where + "duplicate chunk id '" + f[0] + "'");
    t.ids.push_back(f[0]);
    t.labels.push_back(*label);
    for (std::size_t k = 0; k < names.size(); ++k) {
      t.x(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(k)) =
          parse_double(f[k + 2], where);
    }
  }
  return t;
}

FeatureTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open " + path.string());
  return read_csv(in, path.string());
}

ann::Dataset to_dataset(const FeatureTable& table) {
  ann::Dataset d;
  d.x = table.x;
  for (auto l : table.labels) d.y.push_back(static_cast<int>(class_index(l)));
  return d;
}

fusion::LabeledFeatures to_labeled(const FeatureTable& table) {
  fusion::LabeledFeatures f;
  f.x = table.x;
  f.chunk_ids = table.ids;
  for (auto l : table.labels) f.y.push_back(static_cast<int>(class_index(l)));
  return f;
}

}  // namespace keystage::featureset
