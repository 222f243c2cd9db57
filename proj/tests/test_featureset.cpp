#include "doctest.h"

#include <sstream>

#include "keystage/errors.hpp"
#include "keystage/featureset.hpp"
#include "keystage/lingfeat.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace keystage;
using namespace keystage::featureset;

TEST_CASE("row ids") {
  dataset::LabeledChunk r;
  r.book_id = "b1";
  r.text = "Some text.";
  CHECK(row_id(r).rfind("b1-", 0) == 0);
  CHECK(row_id(r).size() == 3 + 16);
  r.chunk_id = "given";
  CHECK(row_id(r) == "given");
}

TEST_CASE("extraction matches the extractor and ignores thread count") {
  const auto rows = test_support::synthetic_rows(30, 5);
  const auto one = extract_table(rows, test_support::lexicons(), 1);
  const auto four = extract_table(rows, test_support::lexicons(), 4);
  REQUIRE(one.size() == rows.size());
  CHECK(one.ids == four.ids);
  CHECK(one.x == four.x);
  CHECK(one.x.cols() == static_cast<Eigen::Index>(lingfeat::feature_names().size()));
  const auto direct =
      lingfeat::extract_features(textseg::segment(rows[7].text), test_support::lexicons());
  for (std::size_t k = 0; k < direct.size(); ++k) {
    CHECK(one.x(7, static_cast<Eigen::Index>(k)) == direct.values[k]);
  }
  CHECK(one.labels[7] == rows[7].key_stage);
}

TEST_CASE("wordless rows are skipped, duplicates rejected") {
  auto rows = test_support::synthetic_rows(2, 1);
  rows[1].text = "... !";
  const auto t = extract_table(rows, test_support::lexicons());
  CHECK(t.size() == rows.size() - 1);
  REQUIRE(t.skipped.size() == 1);
  CHECK(t.skipped[0].find("no words") != std::string::npos);
  rows[3] = rows[2];
  CHECK_THROWS_AS(extract_table(rows, test_support::lexicons()), ValidationError);
}

TEST_CASE("CSV round trip is exact") {
  const auto rows = test_support::synthetic_rows(10, 9);
  const auto t = extract_table(rows, test_support::lexicons());
  std::stringstream ss;
  write_csv(ss, t);
  const std::string first = ss.str();
  const auto back = read_csv(ss, "mem");
  CHECK(back.ids == t.ids);
  CHECK(back.labels == t.labels);
  CHECK(back.x == t.x);
  std::stringstream again;
  write_csv(again, back);
  CHECK(again.str() == first);

  const auto d = to_dataset(back);
  CHECK(d.size() == t.size());
  CHECK(d.y[0] == static_cast<int>(class_index(t.labels[0])));
  const auto l = to_labeled(back);
  CHECK(l.chunk_ids == t.ids);
}

TEST_CASE("CSV validation") {
  std::istringstream wrong_header("chunk_id,key_stage,foo\na,KS2,1\n");
  CHECK_THROWS_AS(read_csv(wrong_header), ValidationError);

  const auto t = extract_table(test_support::synthetic_rows(1, 2), test_support::lexicons());
  std::stringstream ss;
  write_csv(ss, t);
  std::string s = ss.str();
  const auto bad_label = [&] {
    std::string c = s;
    c.replace(c.find(",KS"), 4, ",KS9");
    return c;
  }();
  std::istringstream in(bad_label);
  CHECK_THROWS_WITH_AS(read_csv(in, "f.csv"), doctest::Contains("f.csv:2"), ValidationError);
  std::string nan = s;
  const auto pos = nan.find(',', nan.find(",KS") + 1);
  nan.insert(pos + 1, "x");
  std::istringstream in2(nan);
  CHECK_THROWS_AS(read_csv(in2), ValidationError);
  CHECK_THROWS_AS(read_csv(std::filesystem::path("/nonexistent.csv")), ResourceError);
}
