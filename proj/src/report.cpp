#include "keystage/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "keystage/errors.hpp"

namespace keystage::report {

namespace {

void require_predictions(std::span<const ChunkPrediction> predictions, const char* what) {
  if (predictions.empty()) {
    throw DegenerateInputError(std::string(what) + " needs at least one chunk prediction");
  }
}

struct AgeBand {
  int min_age;
  int max_age;
};

AgeBand age_band(KeyStage ks) {
  switch (ks) {
    case KeyStage::KS2: return {7, 11};
    case KeyStage::KS3: return {11, 14};
    case KeyStage::KS4: return {14, 16};
    case KeyStage::KS5: return {16, 18};
    default: throw ValidationError("no reading age for " + to_string(ks));
  }
}

nlohmann::json stage_map(const std::array<double, kNumClasses>& values) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) j[to_string(stage_from_index(c))] = values[c];
  return j;
}

nlohmann::json chunk_ref(const AnalysisReport& r, std::size_t i) {
  const ChunkReport& c = r.chunks[i];
  return {{"chunk", i},
          {"chunk_id", c.prediction.chunk_id},
          {"label", to_string(c.prediction.label)},
          {"confidence", c.prediction.confidence},
          {"span", {c.span.begin, c.span.end}},
          {"text", c.text}};
}

}  // namespace

std::array<double, kNumClasses> distribution(std::span<const ChunkPrediction> predictions) {
  require_predictions(predictions, "distribution");
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& p : predictions) ++counts[class_index(p.label)];
  std::array<double, kNumClasses> out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out[c] = static_cast<double>(counts[c]) / static_cast<double>(predictions.size());
  }
  return out;
}

double overall_score(std::span<const ChunkPrediction> predictions) {
  require_predictions(predictions, "overall score");
  // Offsetting by the lowest label keeps a single chunk (or one label) exact.
  int lo = stage_value(predictions.front().label);
  for (const auto& p : predictions) lo = std::min(lo, stage_value(p.label));
  double num = 0.0;
  double den = 0.0;
  for (const auto& p : predictions) {
    num += (stage_value(p.label) - lo) * p.confidence;
    den += p.confidence;
  }
  if (!(den > 0.0)) throw DegenerateInputError("overall score: all confidences are zero");
  return lo + num / den;
}

double chunk_difficulty(const ChunkPrediction& prediction) {
  double e = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    e += stage_value(stage_from_index(c)) * prediction.probabilities[c];
  }
  return e;
}

ReadingAge reading_age(double score) {
  constexpr double tol = 1e-9;
  if (!std::isfinite(score) || score < 2.0 - tol || score > 5.0 + tol) {
    throw ValidationError("overall score " + std::to_string(score) + " is outside [2, 5]");
  }
  const int nearest = std::clamp(static_cast<int>(std::floor(score + 0.5)), 2, 5);
  ReadingAge r;
  r.stage = static_cast<KeyStage>(nearest);
  const AgeBand band = age_band(r.stage);
  r.min_age = band.min_age;
  r.max_age = band.max_age;
  r.text = "Suitable for Key Stage " + std::to_string(nearest) + " readers, ages " +
           std::to_string(band.min_age) + "-" + std::to_string(band.max_age) + ".";
  return r;
}

Vocabulary top_vocabulary(std::span<const ChunkWords> chunks, const lexicons::WordList& oxford,
                          const lexicons::WordList& awl, std::size_t k) {
  const auto listed = [&](const std::string& w) { return oxford.contains(w) || awl.contains(w); };
  Vocabulary out;
  out.fallback = chunks.empty() || std::any_of(chunks.begin(), chunks.end(), [](const auto& c) {
                   return c.attention == nullptr;
                 });

  struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& chunk : chunks) {
    if (!out.fallback) {
      for (const auto& a : *chunk.attention) {
        const std::string w = textseg::to_lower(a.token);
        if (!listed(w)) continue;
        acc[w].sum += a.weight;
        ++acc[w].n;
      }
      continue;
    }
    if (chunk.segmented == nullptr) continue;
    std::map<std::string, std::size_t> tf;
    std::size_t words = 0;
    for (const auto& t : chunk.segmented->tokens) {
      if (!t.is_word()) continue;
      ++words;
      std::string w = textseg::to_lower(t.surface);
      if (listed(w)) ++tf[w];
    }
    for (const auto& [w, n] : tf) {
      acc[w].sum += chunk.confidence * static_cast<double>(n) / static_cast<double>(words);
      acc[w].n += n;
    }
  }
  for (const auto& [w, a] : acc) {
    const double importance = out.fallback ? a.sum : a.sum / static_cast<double>(a.n);
    out.items.push_back({w, importance, a.n});
  }
  // std::map iteration is alphabetical, so a stable sort keeps ties in order.
  std::stable_sort(out.items.begin(), out.items.end(),
                   [](const auto& a, const auto& b) { return a.importance > b.importance; });
  if (out.items.size() > k) out.items.resize(k);
  return out;
}

Extremes extreme_excerpts(std::span<const ChunkPrediction> predictions) {
  require_predictions(predictions, "extreme excerpts");
  Extremes e;
  for (std::size_t i = 1; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    const auto& most = predictions[e.most_complex];
    const auto& least = predictions[e.least_complex];
    if (p.label > most.label || (p.label == most.label && p.confidence > most.confidence)) {
      e.most_complex = i;
    }
    if (p.label < least.label || (p.label == least.label && p.confidence > least.confidence)) {
      e.least_complex = i;
    }
  }
  return e;
}

AnalysisReport build_report(const ReportInput& in) {
  if (in.chunks.size() != in.predictions.size()) {
    throw DimensionError("report: " + std::to_string(in.predictions.size()) +
                         " predictions for " + std::to_string(in.chunks.size()) + " chunks");
  }
  if (!in.attention.empty() && in.attention.size() != in.chunks.size()) {
    throw DimensionError("report: attention list does not match the chunks");
  }
  if (in.lexicons == nullptr) throw ValidationError("report: lexicons are required");
  AnalysisReport r;
  r.distribution = distribution(in.predictions);
  r.overall_score = overall_score(in.predictions);
  r.recommendation = reading_age(r.overall_score);
  r.extremes = extreme_excerpts(in.predictions);
  r.curriculum = in.curriculum;
  r.warnings = in.warnings;

  std::vector<ChunkWords> words;
  for (std::size_t i = 0; i < in.chunks.size(); ++i) {
    const textseg::Chunk& chunk = in.chunks[i];
    ChunkReport c;
    c.prediction = in.predictions[i];
    c.difficulty = chunk_difficulty(c.prediction);
    c.oversized = chunk.oversized;
    if (!chunk.segmented.tokens.empty()) {
      c.span = {chunk.segmented.tokens.front().begin, chunk.segmented.tokens.back().end};
    }
    c.text = std::string(in.document.substr(c.span.begin, c.span.size()));
    r.chunks.push_back(std::move(c));
    words.push_back({&chunk.segmented, in.predictions[i].confidence,
                     in.attention.empty() ? nullptr : in.attention[i]});
  }
  r.vocabulary = top_vocabulary(words, in.lexicons->oxford3000, in.lexicons->awl);
  return r;
}

nlohmann::json AnalysisReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["distribution"] = stage_map(distribution);
  j["overall_score"] = overall_score;
  j["recommendation"] = {{"stage", to_string(recommendation.stage)},
                         {"min_age", recommendation.min_age},
                         {"max_age", recommendation.max_age},
                         {"text", recommendation.text}};
  j["difficulty_series"] = nlohmann::json::array();
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    j["difficulty_series"].push_back({{"chunk", i}, {"score", chunks[i].difficulty}});
  }
  nlohmann::json items = nlohmann::json::array();
  for (const auto& v : vocabulary.items) {
    items.push_back(
        {{"token", v.token}, {"importance", v.importance}, {"occurrences", v.occurrences}});
  }
  j["top_vocabulary"] = {{"method", vocabulary.fallback ? "fallback" : "attention"},
                         {"fallback", vocabulary.fallback},
                         {"items", std::move(items)}};
  j["curriculum"] = {{"heuristic", true}, {"counts", curriculum.to_json()}};
  if (!chunks.empty()) {
    j["most_complex"] = chunk_ref(*this, extremes.most_complex);
    j["least_complex"] = chunk_ref(*this, extremes.least_complex);
  }
  j["chunks"] = nlohmann::json::array();
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const ChunkReport& c = chunks[i];
    j["chunks"].push_back({{"index", i},
                           {"chunk_id", c.prediction.chunk_id},
                           {"label", to_string(c.prediction.label)},
                           {"confidence", c.prediction.confidence},
                           {"probabilities", stage_map(c.prediction.probabilities)},
                           {"difficulty", c.difficulty},
                           {"fallback", c.prediction.fallback},
                           {"oversized", c.oversized},
                           {"span", {c.span.begin, c.span.end}}});
  }
  j["warnings"] = warnings;
  return j;
}

nlohmann::json report_schema() {
  using nlohmann::json;
  const json stage = {{"type", "string"}, {"enum", {"KS2", "KS3", "KS4", "KS5"}}};
  const json prob = {{"type", "number"}, {"minimum", 0}, {"maximum", 1}};
  const json stage_fractions = {
      {"type", "object"},
      {"properties", {{"KS2", prob}, {"KS3", prob}, {"KS4", prob}, {"KS5", prob}}},
      {"required", {"KS2", "KS3", "KS4", "KS5"}},
      {"additionalProperties", false}};
  const json score = {{"type", "number"}, {"minimum", 2}, {"maximum", 5}};
  const json index = {{"type", "integer"}, {"minimum", 0}};
  const json span = {{"type", "array"}, {"items", index}, {"minItems", 2}, {"maxItems", 2}};
  const json excerpt = {
      {"type", "object"},
      {"properties",
       {{"chunk", index},
        {"chunk_id", {{"type", "string"}}},
        {"label", stage},
        {"confidence", prob},
        {"span", span},
        {"text", {{"type", "string"}}}}},
      {"required", {"chunk", "chunk_id", "label", "confidence", "span", "text"}}};
  json counts = {{"type", "object"}, {"additionalProperties", false}};
  json required_counts = json::array();
  for (const auto& k : curriculum::feature_keys()) {
    counts["properties"][k] = {{"type", "integer"}, {"minimum", 0}};
    required_counts.push_back(k);
  }
  counts["required"] = required_counts;

  json s;
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["$id"] = std::string("urn:keystage:") + std::string(kReportSchemaVersion);
  s["title"] = "Key Stage analysis report";
  s["type"] = "object";
  s["properties"] = {
      {"schema_version", {{"const", kReportSchemaVersion}}},
      {"distribution", stage_fractions},
      {"overall_score", score},
      {"recommendation",
       {{"type", "object"},
        {"properties",
         {{"stage", stage},
          {"min_age", {{"type", "integer"}}},
          {"max_age", {{"type", "integer"}}},
          {"text", {{"type", "string"}}}}},
        {"required", {"stage", "min_age", "max_age", "text"}}}},
      {"difficulty_series",
       {{"type", "array"},
        {"items",
         {{"type", "object"},
          {"properties", {{"chunk", index}, {"score", score}}},
          {"required", {"chunk", "score"}}}}}},
      {"top_vocabulary",
       {{"type", "object"},
        {"properties",
         {{"method", {{"enum", {"attention", "fallback"}}}},
          {"fallback", {{"type", "boolean"}}},
          {"items",
           {{"type", "array"},
            {"maxItems", kDefaultVocabularySize},
            {"items",
             {{"type", "object"},
              {"properties",
               {{"token", {{"type", "string"}}},
                {"importance", {{"type", "number"}, {"minimum", 0}}},
                {"occurrences", index}}},
              {"required", {"token", "importance", "occurrences"}}}}}}}},
        {"required", {"method", "fallback", "items"}}}},
      {"curriculum",
       {{"type", "object"},
        {"properties", {{"heuristic", {{"type", "boolean"}}}, {"counts", counts}}},
        {"required", {"heuristic", "counts"}}}},
      {"most_complex", excerpt},
      {"least_complex", excerpt},
      {"chunks",
       {{"type", "array"},
        {"minItems", 1},
        {"items",
         {{"type", "object"},
          {"properties",
           {{"index", index},
            {"chunk_id", {{"type", "string"}}},
            {"label", stage},
            {"confidence", prob},
            {"probabilities", stage_fractions},
            {"difficulty", score},
            {"fallback", {{"type", "boolean"}}},
            {"oversized", {{"type", "boolean"}}},
            {"span", span}}},
          {"required",
           {"index", "chunk_id", "label", "confidence", "probabilities", "difficulty",
            "fallback", "oversized", "span"}}}}}},
      {"warnings", {{"type", "array"}, {"items", {{"type", "string"}}}}}};
  s["required"] = {"schema_version", "distribution",  "overall_score", "recommendation",
                   "difficulty_series", "top_vocabulary", "curriculum", "most_complex",
                   "least_complex", "chunks", "warnings"};
  return s;
}

}  // namespace keystage::report
