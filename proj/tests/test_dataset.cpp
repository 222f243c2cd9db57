#include <set>
#include <sstream>

#include "doctest.h"
#include "keystage/dataset.hpp"
#include "keystage/errors.hpp"
#include "keystage/rng.hpp"
#include "synthetic.hpp"

using namespace keystage;
using namespace keystage::dataset;

namespace {

std::vector<LabeledChunk> ingest_string(const std::string& csv) {
  std::istringstream in(csv);
  return ingest_csv(in, "mem");
}

std::string message_of(const std::string& csv) {
  try {
    ingest_string(csv);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::set<std::string> keys(const std::vector<LabeledChunk>& rows) {
  std::set<std::string> out;
  for (const auto& r : rows) out.insert(r.book_id + "\x1f" + r.text);
  return out;
}

}  // namespace

TEST_CASE("map_lexile: table boundaries and anchors") {
  CHECK(map_lexile(399) == KeyStage::KS1);
  CHECK(map_lexile(400) == KeyStage::KS2);
  CHECK(map_lexile(800) == KeyStage::KS2);
  CHECK(map_lexile(801) == KeyStage::KS3);
  CHECK(map_lexile(1000) == KeyStage::KS3);
  CHECK(map_lexile(1001) == KeyStage::KS4);
  CHECK(map_lexile(1200) == KeyStage::KS4);
  CHECK(map_lexile(1201) == KeyStage::KS5);
  CHECK(map_lexile(420) == KeyStage::KS2);
  CHECK(map_lexile(1840) == KeyStage::KS5);
  CHECK(map_lexile(1) == KeyStage::KS1);
  CHECK_THROWS_AS(map_lexile(0), ValidationError);
  CHECK_THROWS_AS(map_lexile(-5), ValidationError);
}

TEST_CASE("map_lexile: total and monotone") {
  int previous = 0;
  for (int s = 1; s <= 4000; ++s) {
    const int v = stage_value(map_lexile(s));
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("read_csv: quoting, newlines, CRLF and BOM") {
  std::istringstream in(
      "\xEF\xBB\xBF"
      "a,b,c\r\n"
      "\"x, y\",\"say \"\"hi\"\"\",\"two\nlines\"\r\n"
      ",,\n"
      "last,row,here");
  const auto recs = read_csv(in);
  REQUIRE(recs.size() == 4);
  CHECK(recs[0].fields == std::vector<std::string>{"a", "b", "c"});
  CHECK(recs[1].fields == std::vector<std::string>{"x, y", "say \"hi\"", "two\nlines"});
  CHECK(recs[1].line == 2);
  CHECK(recs[2].fields == std::vector<std::string>{"", "", ""});
  CHECK(recs[2].line == 4);
  CHECK(recs[3].line == 5);
}

TEST_CASE("read_csv: unterminated quote reports its line") {
  std::istringstream in("a,b\n1,2\n\"open,3\n");
  try {
    read_csv(in);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("ingest_csv: valid rows") {
  const auto rows = ingest_string(
      "book_id,text,lexile,key_stage,extra\n"
      "b1,\"Once, upon a time.\",420,KS2,ignored\n"
      "b2,Discourse on method.,1840,ks5,\n"
      "b3,No lexile here.,,KS3,x\n"
      "b4,Derived from lexile.,1100,,x\n");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].text == "Once, upon a time.");
  CHECK(rows[0].key_stage == KeyStage::KS2);
  CHECK(rows[0].lexile == 420);
  CHECK(rows[1].key_stage == KeyStage::KS5);
  CHECK_FALSE(rows[2].lexile.has_value());
  CHECK(rows[3].key_stage == KeyStage::KS4);
  CHECK(rows[3].line == 5);
}

TEST_CASE("ingest_csv: errors name the line") {
  CHECK(message_of("book_id,text,lexile,key_stage\nb,t,,KS2\nb,t,,KS6\n").find("mem:3") !=
        std::string::npos);
  CHECK(message_of("").find("empty file") != std::string::npos);
  CHECK(message_of("book_id,text,key_stage\nb,t,KS2\n").find("lexile") != std::string::npos);
  CHECK(message_of("book_id,text,lexile,key_stage\nb,t,900,KS2\n").find("maps to KS3") !=
        std::string::npos);
  CHECK(message_of("book_id,text,lexile,key_stage\nb,  ,,KS2\n").find("empty text") !=
        std::string::npos);
  CHECK(message_of("book_id,text,lexile,key_stage\nb,t,abc,KS2\n").find("positive integer") !=
        std::string::npos);
  CHECK(message_of("book_id,text,lexile,key_stage\nb,t,300,\n").find("KS1") !=
        std::string::npos);
  CHECK(message_of("book_id,text,lexile,key_stage\nb,t,,KS1\n").find("mem:2") !=
        std::string::npos);
  CHECK(message_of("book_id,text,lexile,key_stage\nb,t,,KS2,extra\n").find("fields") !=
        std::string::npos);
  CHECK_THROWS_AS(ingest_csv(std::filesystem::path("/nonexistent/file.csv")), ResourceError);
}

TEST_CASE("ingest then emit round-trips row content") {
  auto rows = test_support::synthetic_rows(50, 4);
  rows[0].text = " leading space, \"quotes\"\r\nand CRLF ";
  rows[1].lexile.reset();
  rows[2].chunk_id = "2-abc";
  std::ostringstream out;
  write_chunks_csv(out, rows);
  const auto back = ingest_string(out.str());
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(back[i] == rows[i]);

  std::ostringstream again;
  write_chunks_csv(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("balance_and_split: 5000 per class, 4000/1000") {
  const auto rows = test_support::synthetic_rows(5200, 1);
  const auto split = balance_and_split(rows, {5000, 0.8, 7, false});
  CHECK(class_counts(split.train) == std::array<std::size_t, 4>{4000, 4000, 4000, 4000});
  CHECK(class_counts(split.test) == std::array<std::size_t, 4>{1000, 1000, 1000, 1000});
  CHECK(split.seed == 7);

  const auto again = balance_and_split(rows, {5000, 0.8, 7, false});
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);

  const auto other = balance_and_split(rows, {5000, 0.8, 8, false});
  CHECK_FALSE(other.train == split.train);
}

TEST_CASE("balance_and_split: insufficient rows and bad arguments") {
  const auto rows = test_support::synthetic_rows(5, 2);
  CHECK_THROWS_AS(balance_and_split(rows, {10, 0.8, 1, false}), ValidationError);
  CHECK_THROWS_AS(balance_and_split(rows, {5, 0.0, 1, false}), ValidationError);
  CHECK_THROWS_AS(balance_and_split(rows, {5, 1.0, 1, false}), ValidationError);
  CHECK_THROWS_AS(balance_and_split(rows, {0, 0.5, 1, false}), ValidationError);
}

TEST_CASE("balance_and_split: disjoint with exact counts for random parameters") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t available = 5 + rng.uniform_index(60);
    auto rows = test_support::synthetic_rows(available, rng.next());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].text += " #" + std::to_string(i);
    const std::size_t cap = 1 + rng.uniform_index(available);
    const double fraction = rng.uniform(0.05, 0.95);
    const auto split = balance_and_split(rows, {cap, fraction, rng.next(), false});
    const std::size_t n_train = train_count(cap, fraction);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      CHECK(class_counts(split.train)[c] == n_train);
      CHECK(class_counts(split.test)[c] == cap - n_train);
    }
    const auto a = keys(split.train);
    const auto b = keys(split.test);
    CHECK(a.size() == split.train.size());
    for (const auto& k : b) CHECK(a.count(k) == 0);
  }
}

TEST_CASE("balance_and_split: grouping by book keeps books on one side") {
  const auto rows = test_support::synthetic_rows(400, 9);
  const auto split = balance_and_split(rows, {300, 0.8, 3, true});
  std::set<std::string> train_books;
  for (const auto& r : split.train) train_books.insert(r.book_id);
  for (const auto& r : split.test) CHECK(train_books.count(r.book_id) == 0);
  const auto tr = class_counts(split.train);
  const auto te = class_counts(split.test);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    CHECK(tr[c] + te[c] == 300);
    CHECK(tr[c] <= 240);
  }
}
