// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "keystage/ann.hpp"
#include "keystage/curriculum.hpp"
#include "keystage/dataset.hpp"
#include "keystage/errors.hpp"
#include "keystage/evalstats.hpp"
#include "keystage/fusion.hpp"
#include "keystage/lingfeat.hpp"
#include "keystage/report.hpp"
#include "keystage/rng.hpp"
#include "keystage/service.hpp"
#include "keystage/textseg.hpp"
#include "support.hpp"
#include "synthetic.hpp"

// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen.
#include "httplib.h"

using namespace keystage;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects failed checks; the first few are reported.
class Checker {
 public:
  void check(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) failed_ += (failed_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " failed check(s): " + failed_};
  }

 private:
  std::size_t failures_ = 0;
  std::string failed_;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// Readability and diversity ------------------------------------------------

Outcome formula_oracle() {
  Checker c;
  const auto& familiar = test_support::lexicons().dale_chall;
  const auto close = [&](double a, double e, const std::string& what) {
    c.check(std::abs(a - e) < 1e-9, what + " " + fmt(a, 12) + " vs " + fmt(e, 12));
  };
  const auto cat = lingfeat::readability(textseg::segment("The cat sat."), familiar);
  close(cat.flesch, 119.19, "flesch");
  close(cat.kincaid, -2.62, "kincaid");
  close(cat.ari, -5.80, "ari");
  close(cat.lix, 3.0, "lix");
  close(cat.rix, 0.0, "rix");
  close(cat.smog, 3.1291, "smog");
  close(cat.gunning_fog, 1.2, "gunning_fog");
  c.check(std::abs(cat.coleman_liau - (-8.03)) < 0.005, "coleman_liau");
  close(cat.dale_chall, 0.1488, "dale_chall");

  const auto oracle = json::parse(
      test_support::read_file(test_support::fixtures() / "formula_oracle.json"));
  c.check(oracle.size() == 10, "ten oracle texts");
  std::size_t compared = 0;
  for (const auto& [name, expected] : oracle.items()) {
    const auto seg = textseg::segment(
        test_support::read_file(test_support::fixtures() / "corpus" / name));
    const auto r = lingfeat::readability(seg, familiar);
    const auto& er = expected["readability"];
    const std::vector<std::pair<const char*, double>> scores = {
        {"kincaid", r.kincaid}, {"ari", r.ari},     {"coleman_liau", r.coleman_liau},
        {"flesch", r.flesch},   {"gunning_fog", r.gunning_fog}, {"lix", r.lix},
        {"smog", r.smog},       {"rix", r.rix},     {"dale_chall", r.dale_chall}};
    for (const auto& [k, v] : scores) {
      close(v, er[k].get<double>(), name + " " + k);
      ++compared;
    }
    const auto d = lingfeat::diversity(seg);
    const auto& ed = expected["diversity"];
    const std::vector<std::pair<const char*, double>> div = {
        {"ttr", d.ttr},         {"yule_k", d.yule_k},     {"simpson_d", d.simpson_d},
        {"herdan_c", d.herdan_c}, {"brunet_w", d.brunet_w}, {"honore_r", d.honore_r}};
    for (const auto& [k, v] : div) {
      close(v, ed[k].get<double>(), name + " " + k);
      ++compared;
    }
  }
  return c.outcome(std::to_string(compared) + " scores on 10 texts within 1e-9, 'The cat sat.' exact");
}

// Lexile bands -------------------------------------------------------------

Outcome lexile_mapping() {
  Checker c;
  const std::vector<std::pair<int, KeyStage>> cases = {
      {399, KeyStage::KS1},  {400, KeyStage::KS2},  {800, KeyStage::KS2},  {801, KeyStage::KS3},
      {1000, KeyStage::KS3}, {1001, KeyStage::KS4}, {1200, KeyStage::KS4}, {1201, KeyStage::KS5},
      {420, KeyStage::KS2},  {1840, KeyStage::KS5}};
  for (const auto& [score, ks] : cases) {
    c.check(dataset::map_lexile(score) == ks, std::to_string(score));
  }
  return c.outcome("8 band boundaries and anchors 420, 1840");
}

// Dataset pipeline ---------------------------------------------------------

Outcome dataset_pipeline() {
  Checker c;
  // Stand-in for the published file: 20,000 rows, 5,000 per class.
  std::stringstream csv;
  dataset::write_chunks_csv(csv, test_support::synthetic_rows(5000, 20));
  const std::string content = csv.str();

  const auto start = std::chrono::steady_clock::now();
  std::istringstream in(content);
  const auto rows = dataset::ingest_csv(in, "corpus.csv");
  const auto split = dataset::balance_and_split(rows, {5000, 0.8, 7, false});
  const double secs = seconds_since(start);

  c.check(rows.size() == 20000, "20,000 rows");
  c.check(dataset::class_counts(rows) == std::array<std::size_t, 4>{5000, 5000, 5000, 5000},
          "5,000 per class");
  c.check(dataset::class_counts(split.train) == std::array<std::size_t, 4>{4000, 4000, 4000, 4000},
          "4,000 train per class");
  c.check(dataset::class_counts(split.test) == std::array<std::size_t, 4>{1000, 1000, 1000, 1000},
          "1,000 test per class");
  std::istringstream in2(content);
  const auto again = dataset::balance_and_split(dataset::ingest_csv(in2), {5000, 0.8, 7, false});
  c.check(again.train == split.train && again.test == split.test, "same seed, same split");
  c.check(secs < 10.0, "runtime " + fmt(secs) + " s");
  return c.outcome("20,000 rows -> 4x4,000 / 4x1,000, deterministic, " + fmt(secs, 3) + " s");
}

// ANN ----------------------------------------------------------------------

ann::Topology topo(std::size_t in, std::vector<std::size_t> hidden, std::size_t side = 0) {
  ann::Topology t;
  t.input_dim = in;
  t.hidden = std::move(hidden);
  t.side_dim = side;
  return t;
}

Outcome ann_training() {
  Checker c;
  Rng rng(777);
  const double eps = 1e-5;
  double worst = 0.0;
  std::size_t probes = 0;
  for (int model_i = 0; model_i < 100; ++model_i) {
    const std::size_t in = 2 + rng.uniform_index(4);
    std::vector<std::size_t> hidden;
    for (std::size_t k = 0, depth = 1 + rng.uniform_index(3); k < depth; ++k) {
      hidden.push_back(2 + rng.uniform_index(5));
    }
    const std::size_t side_dim = rng.uniform_index(3);
    ann::Mlp m(topo(in, hidden, side_dim), rng.next());
    for (auto& l : m.layers()) {
      for (Eigen::Index i = 0; i < l.w.size(); ++i) l.w.data()[i] = rng.uniform(-1.0, 1.0);
      for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b(i) = rng.uniform(-0.5, 0.5);
    }
    for (Eigen::Index i = 0; i < m.side_weights().size(); ++i) {
      m.side_weights().data()[i] = rng.uniform(-1.0, 1.0);
    }
    for (Eigen::Index i = 0; i < m.scaler().mean.size(); ++i) {
      m.scaler().mean(i) = rng.uniform(-1.0, 1.0);
      m.scaler().std(i) = rng.uniform(0.5, 2.0);
    }
    const auto n = static_cast<Eigen::Index>(3 + rng.uniform_index(4));
    ann::Matrix x(n, static_cast<Eigen::Index>(in));
    ann::Matrix s = side_dim ? ann::Matrix(n, static_cast<Eigen::Index>(side_dim)) : ann::Matrix();
    // Redraw inputs that sit on a ReLU kink, where the loss is not differentiable.
    for (bool kink = true; kink;) {
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
      for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
      kink = false;
      for (const auto& z : m.forward_batch(x, s).z) kink = kink || (z.array().abs() < 1e-3).any();
    }
    std::vector<int> y(static_cast<std::size_t>(n));
    for (auto& label : y) label = static_cast<int>(rng.uniform_index(4));

    ann::Gradients g;
    m.loss_and_gradients(x, s, y, g);
    const auto probe = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + eps;
      const double up = m.loss(x, s, y);
      param = keep - eps;
      const double down = m.loss(x, s, y);
      param = keep;
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max(std::abs(analytic) + std::abs(numeric), 1e-8));
      ++probes;
    };
    for (std::size_t k = 0; k < m.layers().size(); ++k) {
      auto& l = m.layers()[k];
      for (Eigen::Index i = 0; i < l.w.size(); ++i) probe(l.w.data()[i], g.layers[k].w.data()[i]);
      for (Eigen::Index i = 0; i < l.b.size(); ++i) probe(l.b(i), g.layers[k].b(i));
    }
    for (Eigen::Index i = 0; i < m.side_weights().size(); ++i) {
      probe(m.side_weights().data()[i], g.side_w.data()[i]);
    }
  }
  c.check(worst < 1e-4, "worst relative gradient error " + fmt(worst));

  const auto tr = test_support::gaussian_blobs(200, 10, 1.0, 1);
  const auto va = test_support::gaussian_blobs(50, 10, 1.0, 1);
  ann::TrainConfig cfg;
  cfg.seed = 3;
  const auto start = std::chrono::steady_clock::now();
  const auto r = ann::train(ann::Mlp(topo(10, {32}), 3), {tr.x, ann::Matrix(), tr.y},
                            {va.x, ann::Matrix(), va.y}, cfg);
  const double secs = seconds_since(start);
  c.check(r.best_f1 >= 0.95, "blob macro-F1 " + fmt(r.best_f1));
  c.check(r.history.size() <= 200, "epochs " + std::to_string(r.history.size()));
  c.check(secs < 60.0, "training " + fmt(secs) + " s");
  return c.outcome("gradient rel. error " + fmt(worst, 3) + " over " + std::to_string(probes) +
                   " parameters; blobs macro-F1 " + fmt(r.best_f1) + " in " +
                   std::to_string(r.history.size()) + " epochs, " + fmt(secs, 3) + " s");
}

// Fusion -------------------------------------------------------------------

Outcome fusion_property() {
  Checker c;
  const auto task = test_support::complementary_task(600, 6, 8, 7);
  ann::TrainConfig cfg;
  cfg.seed = 5;
  cfg.learning_rate = 0.01;
  const auto as_ds = [](const test_support::FusionSplit& s) {
    return ann::Dataset{s.features.x, ann::Matrix(), s.features.y};
  };
  const auto emb_ds = [](const test_support::FusionSplit& s) {
    return ann::Dataset{s.embedding_only.x, ann::Matrix(), s.embedding_only.y};
  };
  const auto ling = ann::train(ann::Mlp(topo(6, {32}), 5), as_ds(task.train), as_ds(task.val), cfg);
  const double ling_f1 = ann::evaluate(ling.model, as_ds(task.test)).f1;
  const auto emb =
      ann::train(ann::Mlp(topo(8, {32}), 5), emb_ds(task.train), emb_ds(task.val), cfg);
  const double emb_f1 = ann::evaluate(emb.model, emb_ds(task.test)).f1;
  const auto fused = fusion::train_fused(fusion::fuse_from_unimodal(ling.model, 8),
                                         task.embeddings, task.train.features,
                                         task.val.features, cfg);
  const double fused_f1 =
      fusion::evaluate_fused(fused.model, task.embeddings, task.test.features).f1;
  c.check(ling_f1 <= 0.6 && emb_f1 <= 0.6, "single-modality ceilings");
  c.check(fused_f1 >= std::max(ling_f1, emb_f1) + 0.1, "fused margin");

  // Zero embeddings: fused training follows the unimodal run exactly.
  fusion::EmbeddingSet zero = task.embeddings;
  for (auto& [id, rec] : zero.records) std::fill(rec.vector.begin(), rec.vector.end(), 0.0);
  const auto uni = ann::train(ann::Mlp(topo(6, {16}), 9), as_ds(task.train), as_ds(task.val), cfg);
  const auto zf = fusion::train_fused(fusion::fuse_fresh(topo(6, {16}), 8, 9), zero,
                                      task.train.features, task.val.features, cfg);
  const auto side = fusion::gather_embeddings(zero, task.test.features.chunk_ids);
  const auto a = ann::argmax_rows(uni.model.predict_proba(task.test.features.x));
  const auto b = ann::argmax_rows(zf.model.network.predict_proba(task.test.features.x, side));
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i] ? 1 : 0;
  c.check(same == a.size(), "zero-embedding argmax parity " + std::to_string(same) + "/" +
                                std::to_string(a.size()));
  return c.outcome("macro-F1 linguistic " + fmt(ling_f1, 3) + ", embedding " + fmt(emb_f1, 3) +
                   ", fused " + fmt(fused_f1, 3) + "; zero-embedding parity " +
                   std::to_string(same) + "/" + std::to_string(a.size()));
}

// Report aggregation -------------------------------------------------------

ChunkPrediction labeled(KeyStage ks, double confidence) {
  ChunkPrediction p;
  p.label = ks;
  p.confidence = confidence;
  p.probabilities.fill((1.0 - confidence) / 3.0);
  p.probabilities[class_index(ks)] = confidence;
  return p;
}

Outcome report_aggregation() {
  Checker c;
  const std::vector<ChunkPrediction> skew = {labeled(KeyStage::KS2, 0.9),
                                             labeled(KeyStage::KS4, 0.1)};
  c.check(report::overall_score(skew) == 2.2, "overall 2.2");
  const std::vector<ChunkPrediction> even = {labeled(KeyStage::KS2, 0.5),
                                             labeled(KeyStage::KS4, 0.5)};
  c.check(report::overall_score(even) == 3.0, "overall 3.0");
  c.check(report::chunk_difficulty(make_prediction("u", {0.25, 0.25, 0.25, 0.25})) == 3.5,
          "difficulty 3.5");
  c.check(report::chunk_difficulty(make_prediction("r", {0.1, 0.2, 0.3, 0.4})) == 4.0,
          "difficulty 4.0");

  Rng rng(15);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ChunkPrediction> ps;
    for (std::size_t i = 0, n = 1 + rng.uniform_index(200); i < n; ++i) {
      std::array<double, 4> p{};
      double s = 0.0;
      for (auto& v : p) s += (v = rng.uniform01() + 1e-6);
      for (auto& v : p) v /= s;
      ps.push_back(make_prediction("x", p));
    }
    const auto d = report::distribution(ps);
    worst = std::max(worst, std::abs(std::accumulate(d.begin(), d.end(), 0.0) - 1.0));
  }
  c.check(worst <= 1e-9, "distribution sum error " + fmt(worst));
  return c.outcome("fixtures 2.2, 3.0, 3.5, 4.0 exact; 1,000 distributions sum to 1 (max error " +
                   fmt(worst, 2) + ")");
}

// Model comparison ---------------------------------------------------------

Outcome model_comparison() {
  Checker c;
  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<evalstats::ModelResult> rs(1 + rng.uniform_index(100));
    const bool coarse = trial % 2 == 0;
    for (auto& r : rs) {
      r.f1 = coarse ? static_cast<double>(rng.uniform_index(6)) / 5.0 : rng.uniform01();
      r.inference_time_s = coarse ? 0.001 * static_cast<double>(1 + rng.uniform_index(6))
                                  : 0.001 + rng.uniform01();
    }
    std::vector<std::size_t> brute;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < rs.size() && !dominated; ++j) {
        dominated = j != i && evalstats::dominates(rs[j], rs[i]);
      }
      if (!dominated) brute.push_back(i);
    }
    c.check(evalstats::pareto_front(rs) == brute, "random instance " + std::to_string(trial));
  }

  const auto rows = evalstats::read_results_csv(test_support::fixtures() / "table4_results.csv");
  c.check(rows.size() == 16, "16 published rows");
  std::vector<std::string> front;
  for (std::size_t i : evalstats::pareto_front(rows)) {
    front.push_back(rows[i].name + " (" + rows[i].modality + ")");
  }
  std::sort(front.begin(), front.end());
  c.check(front == std::vector<std::string>{"ALBERT + ANN (multimodal)", "DistilBERT (unimodal)",
                                            "DistilBERT + ANN (multimodal)",
                                            "ELECTRA + ANN (multimodal)"},
          "published front");
  const auto cmp = evalstats::compare(rows);
  double t = NAN;
  for (const auto& tt : cmp.tests) {
    if (tt.metric == "accuracy") t = tt.result.t;
  }
  c.check(std::abs(t - 9.45) < 0.05, "accuracy t " + fmt(t));
  return c.outcome("500 random fronts equal brute force; published front of 4; accuracy t = " +
                   fmt(t, 6));
}

// Curriculum ---------------------------------------------------------------

Outcome curriculum_detectors() {
  Checker c;
  const auto kw = curriculum::Keywords::load(test_support::resources() / "curriculum");
  const std::string text =
      test_support::read_file(test_support::fixtures() / "curriculum_annotated.txt");
  const auto expected = json::parse(
      test_support::read_file(test_support::fixtures() / "curriculum_annotated.json"));
  c.check(textseg::segment(text).sentences.size() == 30, "30 sentences");
  const auto counts = curriculum::count_features(text, kw);
  for (const auto& [k, v] : expected.items()) {
    c.check(counts.at(k) == v.get<std::size_t>(), k);
  }

  static const std::vector<std::string> vocab = {
      "the", "wind", "whispered", "and", "although", "however", "therefore", "like", "as",
      "deep", "ocean", "not", "only", "but", "also", "neither", "nor", "she", "ran", "big",
      "brown", "bears", "bounced", "flawed", "wonderful", "disaster", "ironically", "in",
      "summary", "suggests", "moon", "smiled", "because", "yet"};
  static const std::vector<std::string> marks = {",", ";", ":", " —", "...", " (", ")", "\""};
  Rng rng(4242);
  std::size_t additive = 0;
  for (int doc = 0; doc < 100; ++doc) {
    std::string d;
    for (std::size_t s = 0, n = 3 + rng.uniform_index(25); s < n; ++s) {
      std::string sentence;
      for (std::size_t w = 0, m = 1 + rng.uniform_index(18); w < m; ++w) {
        std::string word = vocab[rng.uniform_index(vocab.size())];
        if (w == 0) word[0] = static_cast<char>(word[0] - 'a' + 'A');
        if (!sentence.empty()) sentence += ' ';
        sentence += word;
        if (rng.uniform01() < 0.15) sentence += marks[rng.uniform_index(marks.size())];
      }
      d += sentence + (rng.uniform01() < 0.8 ? ". " : "? ");
    }
    auto summed = curriculum::Counts::zero();
    for (const auto& chunk : textseg::chunk_document(d, 5 + rng.uniform_index(40))) {
      summed += curriculum::count_features(chunk.segmented, kw);
    }
    const bool ok = summed == curriculum::count_features(d, kw);
    additive += ok ? 1 : 0;
    c.check(ok, "additivity document " + std::to_string(doc));
  }
  return c.outcome(std::to_string(expected.size()) + " hand counts exact; additivity on " +
                   std::to_string(additive) + "/100 documents");
}

// Service ------------------------------------------------------------------

Outcome service_golden() {
  Checker c;
  const auto resources = analysis::Resources::load(test_support::resources());
  config::EngineConfig cfg;
  cfg.token = "acceptance";
  service::Service svc(cfg, resources);
  svc.set_engine(service::make_engine(
      fusion::Classifier(ann::load_model(test_support::fixtures() / "engine_model.json")),
      resources, nullptr));
  const int port = svc.start("127.0.0.1", 0);
  const httplib::Headers auth = {{"Authorization", "Bearer acceptance"}};
  const std::string body =
      json{{"text", test_support::read_file(test_support::fixtures() / "service_golden.txt")},
           {"token_budget", 64}}
          .dump();
  const auto strip = [](const std::string& reply) {
    auto j = json::parse(reply);
    j.erase("timing");
    return j.dump();
  };

  std::string golden = test_support::read_file(test_support::fixtures() / "service_golden.json");
  while (!golden.empty() && golden.back() == '\n') golden.pop_back();
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(60, 0);
  const auto first = cli.Post("/classify", auth, body, "application/json");
  c.check(first && first->status == 200, "golden request status");
  if (first && first->status == 200) c.check(strip(first->body) == golden, "golden bytes");

  std::vector<std::string> replies(50);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < replies.size(); ++i) {
    threads.emplace_back([&, i] {
      httplib::Client client("127.0.0.1", port);
      client.set_read_timeout(60, 0);
      const auto r = client.Post("/classify", auth, body, "application/json");
      replies[i] = r && r->status == 200 ? strip(r->body) : std::string("failed");
    });
  }
  for (auto& t : threads) t.join();
  std::size_t identical = 0;
  for (const auto& r : replies) identical += r == golden ? 1 : 0;
  c.check(identical == replies.size(), "concurrent identical " + std::to_string(identical) + "/50");

  const auto health = json::parse(cli.Get("/health")->body);
  c.check(health["embedding_sources"] == json::array({"none"}), "runs without embedder output");
  svc.stop();
  return c.outcome("golden reply byte-stable; 50/50 concurrent replies identical; engine only, no "
                   "embedder or web UI");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"readability and diversity formulas match the oracle", formula_oracle},
      {"Lexile to Key Stage mapping", lexile_mapping},
      {"dataset pipeline: balance, split, determinism, runtime", dataset_pipeline},
      {"ANN gradient check and separable training", ann_training},
      {"fusion beats each modality; zero-embedding parity", fusion_property},
      {"overall score, chunk difficulty and distribution", report_aggregation},
      {"Pareto front and paired t-test", model_comparison},
      {"curriculum detectors: hand counts and additivity", curriculum_detectors},
      {"service: golden reply and concurrent determinism", service_golden},
  };
  std::size_t failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << criteria[i].first << ": "
              << o.detail << " (" << fmt(seconds_since(start), 3) << " s)" << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
