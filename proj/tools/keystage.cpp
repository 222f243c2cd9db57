// keystage: command-line entry point for every pipeline stage.
// Exit status: 0 success, 1 runtime error, 2 usage error. Machine output goes
// to stdout, progress and diagnostics to stderr.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "keystage/analyzer.hpp"
#include "keystage/ann.hpp"
#include "keystage/config.hpp"
#include "keystage/dataset.hpp"
#include "keystage/errors.hpp"
#include "keystage/evalstats.hpp"
#include "keystage/featureset.hpp"
#include "keystage/fusion.hpp"
#include "keystage/lingfeat.hpp"
#include "keystage/service.hpp"
#include "keystage/textseg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace keystage;

namespace {

bool quiet = false;

void log(const std::string& msg) {
  if (!quiet) std::cerr << msg << '\n';
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + path.string());
  out << content;
  if (!out) throw ResourceError("error writing " + path.string());
}

void emit(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file(out_path, text);
    log("wrote " + out_path);
  }
}

fs::path resource_root(const std::string& flag) {
  return flag.empty() ? lexicons::ResourcePaths::default_root() : fs::path(flag);
}

struct TrainFlags {
  double learning_rate = 0.001;
  double momentum = 0.0;
  std::size_t epochs = 200;
  std::size_t patience = 15;
  std::size_t batch = 32;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--lr", learning_rate, "Learning rate")->capture_default_str();
    cmd->add_option("--momentum", momentum, "SGD momentum")->capture_default_str();
    cmd->add_option("--epochs", epochs, "Maximum epochs")->capture_default_str();
    cmd->add_option("--patience", patience, "Early-stopping patience in epochs")
        ->capture_default_str();
    cmd->add_option("--batch", batch, "Mini-batch size")->capture_default_str();
    cmd->add_option("--seed", seed, "Seed for initialization and batch order")
        ->capture_default_str();
  }

  ann::TrainConfig config() const {
    ann::TrainConfig c;
    c.learning_rate = learning_rate;
    c.momentum = momentum;
    c.max_epochs = epochs;
    c.patience = patience;
    c.batch_size = batch;
    c.seed = seed;
    c.validate();
    return c;
  }
};

json metrics_no_time(const ann::Metrics& m) {
  json j = ann::metrics_json(m);
  j.erase("inference_time_s");
  return j;
}

json history_json(const ann::TrainResult& r) {
  json h = json::array();
  for (const auto& e : r.history) {
    h.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_f1", e.val_f1}});
  }
  return {{"best_epoch", r.best_epoch},
          {"best_f1", r.best_f1},
          {"stopped_early", r.stopped_early},
          {"history", h}};
}

featureset::FeatureTable load_table(const std::string& path) {
  auto t = featureset::read_csv(fs::path(path));
  if (t.size() == 0) throw ValidationError(path + ": no rows");
  log("read " + std::to_string(t.size()) + " rows from " + path);
  return t;
}

ann::Mlp stamp(ann::Mlp m) {
  m.feature_names = lingfeat::feature_names();
  m.schema_version = std::string(lingfeat::kSchemaVersion);
  return m;
}

// features ---------------------------------------------------------------

struct FeaturesCmd {
  std::string text_file;
  std::string chunks_csv;
  std::string out;
  std::string resources;
  std::size_t token_budget = 0;
  std::size_t threads = 1;
  bool schema = false;

  int run() const {
    if (schema) {
      emit(lingfeat::schema_json(), out);
      return 0;
    }
    const auto lex = lexicons::Lexicons::load(lexicons::ResourcePaths::under(resource_root(resources)));
    if (!chunks_csv.empty()) {
      if (out.empty()) throw ValidationError("--chunks needs --out");
      const auto rows = dataset::ingest_csv(fs::path(chunks_csv));
      const auto table = featureset::extract_table(rows, lex, threads);
      for (const auto& s : table.skipped) log("skipped " + s);
      featureset::write_csv(fs::path(out), table);
      log("wrote " + std::to_string(table.size()) + " rows to " + out);
      return 0;
    }
    const std::string text = read_input(text_file);
    json j = {{"schema_version", lingfeat::kSchemaVersion}, {"names", lingfeat::feature_names()}};
    if (token_budget == 0) {
      j["values"] = lingfeat::extract_features(textseg::segment(text), lex).values;
    } else {
      json chunks = json::array();
      for (const auto& c : textseg::chunk_document(text, token_budget)) {
        if (c.segmented.word_count() == 0) continue;
        chunks.push_back({{"chunk_id", textseg::chunk_id(c)},
                          {"index", c.index},
                          {"values", lingfeat::extract_features(c.segmented, lex).values}});
      }
      j["chunks"] = chunks;
    }
    emit(j, out);
    return 0;
  }
};

// dataset ----------------------------------------------------------------

struct DatasetSplitCmd {
  std::string in;
  std::string out_dir;
  std::size_t cap = 5000;
  double train_frac = 0.8;
  std::uint64_t seed = 0;
  bool group_by_book = false;

  int run() const {
    const auto rows = dataset::ingest_csv(fs::path(in));
    log("ingested " + std::to_string(rows.size()) + " rows from " + in);
    dataset::SplitOptions o;
    o.per_class_cap = cap;
    o.train_fraction = train_frac;
    o.seed = seed;
    o.group_by_book = group_by_book;
    const auto split = dataset::balance_and_split(rows, o);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    for (const auto& [name, part] : {std::pair{"train.csv", &split.train}, {"test.csv", &split.test}}) {
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw ResourceError("cannot write " + (dir / name).string());
      dataset::write_chunks_csv(f, *part);
    }
    const auto counts = [](const std::vector<dataset::LabeledChunk>& rs) {
      json j = json::object();
      const auto c = dataset::class_counts(rs);
      for (std::size_t k = 0; k < kNumClasses; ++k) j[to_string(stage_from_index(k))] = c[k];
      return j;
    };
    json manifest = {{"input", fs::path(in).filename().string()},
                     {"input_rows", rows.size()},
                     {"input_counts", counts(rows)},
                     {"seed", seed},
                     {"per_class_cap", cap},
                     {"train_fraction", train_frac},
                     {"group_by_book", group_by_book},
                     {"train", {{"file", "train.csv"}, {"rows", split.train.size()}, {"counts", counts(split.train)}}},
                     {"test", {{"file", "test.csv"}, {"rows", split.test.size()}, {"counts", counts(split.test)}}}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << manifest.dump(2) << '\n';
    return 0;
  }
};

struct DatasetChunksCmd {
  std::string in;
  std::string out;

  int run() const {
    const auto rows = dataset::ingest_csv(fs::path(in));
    std::ostringstream ss;
    for (const auto& r : rows) {
      ss << json{{"chunk_id", featureset::row_id(r)}, {"text", r.text}}.dump() << '\n';
    }
    if (out.empty() || out == "-") {
      std::cout << ss.str();
    } else {
      write_file(out, ss.str());
      log("wrote " + std::to_string(rows.size()) + " chunks to " + out);
    }
    return 0;
  }
};

// chunks -----------------------------------------------------------------

struct ChunksCmd {
  std::string text_file;
  std::string out;
  std::size_t token_budget = textseg::kDefaultTokenBudget;

  int run() const {
    std::ostringstream ss;
    const auto records = analysis::chunk_records(read_input(text_file), token_budget);
    for (const auto& r : records) ss << r.dump() << '\n';
    if (out.empty() || out == "-") {
      std::cout << ss.str();
    } else {
      write_file(out, ss.str());
      log("wrote " + std::to_string(records.size()) + " chunks to " + out);
    }
    return 0;
  }
};

// train / search ---------------------------------------------------------

struct TrainCmd {
  std::string train_csv;
  std::string val_csv;
  std::vector<std::size_t> hidden = {64, 32};
  std::string out;
  std::string history;
  TrainFlags flags;

  int run() const {
    const auto train_t = featureset::to_dataset(load_table(train_csv));
    const auto val_t = featureset::to_dataset(load_table(val_csv));
    ann::Topology t;
    t.input_dim = lingfeat::feature_names().size();
    t.hidden = hidden;
    const auto init = stamp(ann::Mlp(t, flags.seed));
    const auto result = ann::train(init, train_t, val_t, flags.config());
    log("best validation macro-F1 " + std::to_string(result.best_f1) + " at epoch " +
        std::to_string(result.best_epoch));
    ann::save_model(result.model, out);
    log("wrote " + out);
    json summary = history_json(result);
    summary["topology"] = {{"input_dim", t.input_dim}, {"hidden", t.hidden}};
    summary["parameters"] = result.model.parameter_count();
    summary["validation"] = metrics_no_time(ann::evaluate(result.model, val_t));
    if (!history.empty()) write_file(history, summary.dump(2) + "\n");
    summary.erase("history");
    std::cout << summary.dump(2) << '\n';
    return 0;
  }
};

struct SearchCmd {
  std::string train_csv;
  std::string val_csv;
  std::string out_dir;
  std::size_t trials = 20;
  std::size_t threads = 1;
  ann::SearchSpace space;
  TrainFlags flags;

  int run() const {
    space.validate();
    const auto train_t = featureset::to_dataset(load_table(train_csv));
    const auto val_t = featureset::to_dataset(load_table(val_csv));
    log("searching " + std::to_string(trials) + " topologies on " + std::to_string(threads) +
        " thread(s)");
    auto result = ann::random_search(space, trials, train_t, val_t, flags.config(), flags.seed, threads);
    json ranked = json::array();
    for (std::size_t r = 0; r < result.ranked.size(); ++r) {
      const auto& tr = result.ranked[r];
      json j = {{"rank", r + 1},
                {"trial", tr.index},
                {"hidden", tr.topology.hidden},
                {"parameters", tr.topology.parameter_count()},
                {"seed", tr.seed},
                {"best_epoch", tr.best_epoch}};
      if (tr.metrics) {
        j["metrics"] = metrics_no_time(*tr.metrics);
      } else {
        j["error"] = tr.error;
      }
      ranked.push_back(j);
    }
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const json report = {{"seed", flags.seed},
                         {"trials", trials},
                         {"space",
                          {{"min_layers", space.min_layers},
                           {"max_layers", space.max_layers},
                           {"min_width", space.min_width},
                           {"max_width", space.max_width}}},
                         {"ranked", ranked}};
    write_file(dir / "trials.json", report.dump(2) + "\n");
    if (!result.best_model) throw Error("every trial failed");
    ann::save_model(stamp(*result.best_model), dir / "best_model.json");
    log("wrote " + (dir / "trials.json").string() + " and " + (dir / "best_model.json").string());
    std::cout << ranked.front().dump(2) << '\n';
    return 0;
  }
};

// fuse -------------------------------------------------------------------

struct FuseCmd {
  std::string model;
  std::string embeddings;
  std::string train_csv;
  std::string val_csv;
  std::string out;
  bool fresh = false;
  bool freeze_hidden = false;
  std::vector<std::size_t> hidden = {64, 32};
  TrainFlags flags;

  int run() const {
    const auto emb = fusion::load_embeddings(embeddings);
    for (const auto& w : emb.warnings) log("embeddings: " + w);
    const auto train_t = featureset::to_labeled(load_table(train_csv));
    const auto val_t = featureset::to_labeled(load_table(val_csv));
    std::string embedding_model;
    if (!emb.records.empty()) embedding_model = emb.records.begin()->second.model;
    fusion::FusedModel init;
    if (fresh) {
      ann::Topology t;
      t.input_dim = lingfeat::feature_names().size();
      t.hidden = hidden;
      init = fusion::fuse_fresh(t, emb.dim, flags.seed, embedding_model);
      init.network = stamp(init.network);
      init.fallback = stamp(init.fallback);
    } else {
      if (model.empty()) throw ValidationError("--model is required unless --fresh is given");
      init = fusion::fuse_from_unimodal(stamp(ann::load_model(model)), emb.dim, embedding_model);
    }
    auto config = flags.config();
    config.freeze_hidden = freeze_hidden;
    const auto result = fusion::train_fused(init, emb, train_t, val_t, config);
    fusion::save_fused(result.model, out);
    log("wrote " + out);
    json summary = history_json(result.run);
    summary.erase("history");
    summary["embedding_dim"] = emb.dim;
    summary["validation"] = metrics_no_time(fusion::evaluate_fused(result.model, emb, val_t));
    std::cout << summary.dump(2) << '\n';
    return 0;
  }
};

// eval -------------------------------------------------------------------

struct EvalCmd {
  std::string model;
  std::string data;
  std::string embeddings;
  bool allow_fallback = false;
  std::string append_results;
  std::string name;
  std::string modality;

  int run() const {
    const auto clf = fusion::Classifier::load(model);
    const auto table = load_table(data);
    std::optional<fusion::EmbeddingSet> emb;
    if (!embeddings.empty()) emb = fusion::load_embeddings(embeddings);
    std::vector<int> truth;
    std::vector<int> predicted;
    std::size_t fallbacks = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < table.size(); ++r) {
      const auto row = table.x.row(static_cast<Eigen::Index>(r));
      std::vector<double> features(row.begin(), row.end());
      const fusion::EmbeddingRecord* rec = emb ? emb->find(table.ids[r]) : nullptr;
      const auto p = clf.predict(table.ids[r], features, rec, allow_fallback);
      fallbacks += p.fallback ? 1 : 0;
      truth.push_back(static_cast<int>(class_index(table.labels[r])));
      predicted.push_back(static_cast<int>(class_index(p.label)));
    }
    const auto stop = std::chrono::steady_clock::now();
    auto m = ann::compute_metrics(truth, predicted);
    m.parameter_count = clf.parameter_count();
    m.inference_time_s =
        std::chrono::duration<double>(stop - start).count() / static_cast<double>(table.size());
    json j = ann::metrics_json(m);
    j["rows"] = table.size();
    j["fallbacks"] = fallbacks;
    j["multimodal"] = clf.multimodal();
    if (!append_results.empty()) {
      const bool fresh_file = !fs::exists(append_results) || fs::file_size(append_results) == 0;
      std::ofstream f(append_results, std::ios::binary | std::ios::app);
      if (!f) throw ResourceError("cannot write " + append_results);
      if (fresh_file) {
        dataset::write_csv_row(f, {"name", "accuracy", "precision", "recall", "f1", "parameters",
                                   "inference_time_s", "modality"});
      }
      const auto num = [](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
      };
      dataset::write_csv_row(
          f, {name.empty() ? fs::path(model).stem().string() : name, num(m.accuracy),
              num(m.precision), num(m.recall), num(m.f1), std::to_string(m.parameter_count),
              num(m.inference_time_s),
              modality.empty() ? (clf.multimodal() ? "multimodal" : "unimodal") : modality});
      log("appended results to " + append_results);
    }
    std::cout << j.dump(2) << '\n';
    return 0;
  }
};

// analyze / compare / schema ----------------------------------------------

struct AnalyzeCmd {
  std::string text_file;
  std::string model;
  std::string embeddings;
  std::string resources;
  std::size_t token_budget = textseg::kDefaultTokenBudget;
  bool as_json = false;
  bool linguistics_only = false;
  bool allow_fallback = false;

  int run() const {
    const std::string text = read_input(text_file);
    auto res = analysis::Resources::load(resource_root(resources));
    std::shared_ptr<const fusion::EmbeddingSet> emb;
    if (!embeddings.empty()) {
      emb = std::make_shared<const fusion::EmbeddingSet>(fusion::load_embeddings(embeddings));
    }
    const analysis::Analyzer analyzer(fusion::Classifier::load(model), res, emb);
    analysis::AnalyzeOptions o;
    o.token_budget = token_budget;
    o.linguistics_only = linguistics_only;
    o.allow_fallback = allow_fallback;
    const auto out = analyzer.analyze(text, o);
    if (as_json) {
      std::cout << analyzer.response_json(out).dump(2) << '\n';
      return 0;
    }
    const auto& r = out.report;
    std::printf("Overall score %.2f. %s\n", r.overall_score, r.recommendation.text.c_str());
    std::printf("Chunks: %zu\n", r.chunks.size());
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      std::printf("  %s %5.1f%%\n", to_string(stage_from_index(k)).c_str(), 100.0 * r.distribution[k]);
    }
    std::printf("Top vocabulary:");
    for (const auto& v : r.vocabulary.items) std::printf(" %s", v.token.c_str());
    std::printf("\n");
    for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
    return 0;
  }
};

struct CompareCmd {
  std::string results;

  int run() const {
    const auto rows = evalstats::read_results_csv(fs::path(results));
    const auto c = evalstats::compare(rows);
    for (const auto& w : c.warnings) log("warning: " + w);
    std::cout << evalstats::comparison_json(rows, c).dump(2) << '\n';
    return 0;
  }
};

// serve ------------------------------------------------------------------

struct ServeCmd {
  std::string config_path;
  std::string model;
  std::string embeddings;
  std::string resources;
  std::string host;
  std::string token;
  int port = -1;
  std::size_t threads = 0;

  int run() const {
    auto cfg = config::load(config_path);
    if (!model.empty()) cfg.model_path = model;
    if (!embeddings.empty()) cfg.embeddings_path = embeddings;
    if (!resources.empty()) cfg.resources_dir = resources;
    if (!host.empty()) cfg.host = host;
    if (!token.empty()) cfg.token = token;
    if (port >= 0) cfg.port = port;
    if (threads > 0) cfg.threads = threads;
    cfg.validate();
    if (cfg.token.empty()) log("warning: no bearer token configured; /classify is open");

    // Handle shutdown signals on this thread only.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto res = analysis::Resources::load(resource_root(cfg.resources_dir.string()));
    service::Service svc(cfg, res);
    const int bound = svc.start(cfg.host, cfg.port);
    log("listening on " + cfg.host + ":" + std::to_string(bound));
    try {
      if (cfg.model_path.empty()) throw ValidationError("no model configured");
      auto clf = fusion::Classifier::load(cfg.model_path);
      std::shared_ptr<const fusion::EmbeddingSet> emb;
      std::string source;
      if (!cfg.embeddings_path.empty()) {
        emb = std::make_shared<const fusion::EmbeddingSet>(fusion::load_embeddings(cfg.embeddings_path));
        source = cfg.embeddings_path.stem().string();
      }
      svc.set_engine(service::make_engine(std::move(clf), res, emb, source));
      log("model loaded from " + cfg.model_path.string());
    } catch (const std::exception& e) {
      svc.set_load_error(e.what());
      log(std::string("model not loaded: ") + e.what());
    }
    int sig = 0;
    sigwait(&signals, &sig);
    log("shutting down");
    svc.stop();
    return 0;
  }
};

struct SchemaCmd {
  bool features = false;
  int run() const {
    std::cout << (features ? lingfeat::schema_json() : analysis::response_schema()).dump(2) << '\n';
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key Stage readability engine"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");
  std::function<int()> action;

  FeaturesCmd features;
  auto* c_features = app.add_subcommand("features", "Extract linguistic features");
  auto* features_src = c_features->add_option_group("source");
  features_src->add_option("--text-file", features.text_file, "Plain-text file, - for stdin");
  features_src->add_option("--chunks", features.chunks_csv, "Dataset CSV; writes a feature table");
  features_src->add_flag("--schema", features.schema, "Print the feature schema");
  features_src->require_option(1);
  c_features->add_option("--out", features.out, "Output path (stdout by default)");
  c_features->add_option("--token-budget", features.token_budget,
                         "Chunk the text and extract per chunk");
  c_features->add_option("--threads", features.threads, "Worker threads for --chunks")
      ->capture_default_str();
  c_features->add_option("--resources", features.resources, "Resource directory");
  c_features->callback([&] { action = [&] { return features.run(); }; });

  auto* c_dataset = app.add_subcommand("dataset", "Corpus preparation");
  c_dataset->require_subcommand(1);
  DatasetSplitCmd split;
  auto* c_split = c_dataset->add_subcommand("split", "Balance per class and split train/test");
  c_split->add_option("--in", split.in, "Corpus CSV (book_id,text,lexile,key_stage)")->required();
  c_split->add_option("--out-dir", split.out_dir, "Directory for train.csv, test.csv, manifest.json")
      ->required();
  c_split->add_option("--cap", split.cap, "Rows kept per class")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_split->add_option("--train-frac", split.train_frac, "Training fraction per class")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  c_split->add_option("--seed", split.seed, "Sampling seed")->capture_default_str();
  c_split->add_flag("--group-by-book", split.group_by_book, "Keep each book on one side");
  c_split->callback([&] { action = [&] { return split.run(); }; });
  DatasetChunksCmd dchunks;
  auto* c_dchunks = c_dataset->add_subcommand("chunks", "Export {chunk_id, text} JSONL for the embedder");
  c_dchunks->add_option("--in", dchunks.in, "Dataset CSV")->required();
  c_dchunks->add_option("--out", dchunks.out, "Output JSONL (stdout by default)");
  c_dchunks->callback([&] { action = [&] { return dchunks.run(); }; });

  ChunksCmd chunks;
  auto* c_chunks = app.add_subcommand("chunks", "Chunk a text and export JSONL for the embedder");
  c_chunks->add_option("--text-file", chunks.text_file, "Plain-text file, - for stdin")->required();
  c_chunks->add_option("--token-budget", chunks.token_budget, "Tokens per chunk")
      ->capture_default_str()->check(CLI::PositiveNumber);
  c_chunks->add_option("--out", chunks.out, "Output JSONL (stdout by default)");
  c_chunks->callback([&] { action = [&] { return chunks.run(); }; });

  TrainCmd train;
  auto* c_train = app.add_subcommand("train", "Train the linguistic network");
  c_train->add_option("--train", train.train_csv, "Training feature table")->required();
  c_train->add_option("--val", train.val_csv, "Validation feature table")->required();
  c_train->add_option("--hidden", train.hidden, "Hidden widths, e.g. 64,32")
      ->delimiter(',')->capture_default_str();
  c_train->add_option("--out", train.out, "Model output path")->required();
  c_train->add_option("--history", train.history, "Write the per-epoch history here");
  train.flags.add_to(c_train);
  c_train->callback([&] { action = [&] { return train.run(); }; });

  SearchCmd search;
  auto* c_search = app.add_subcommand("search", "Random search over network topologies");
  c_search->add_option("--train", search.train_csv, "Training feature table")->required();
  c_search->add_option("--val", search.val_csv, "Validation feature table")->required();
  c_search->add_option("--out-dir", search.out_dir, "Directory for trials.json, best_model.json")
      ->required();
  c_search->add_option("--trials", search.trials, "Number of topologies")->capture_default_str();
  c_search->add_option("--threads", search.threads, "Parallel trials")->capture_default_str();
  c_search->add_option("--min-layers", search.space.min_layers)->capture_default_str();
  c_search->add_option("--max-layers", search.space.max_layers)->capture_default_str();
  c_search->add_option("--min-width", search.space.min_width)->capture_default_str();
  c_search->add_option("--max-width", search.space.max_width)->capture_default_str();
  search.flags.add_to(c_search);
  c_search->callback([&] { action = [&] { return search.run(); }; });

  FuseCmd fuse;
  auto* c_fuse = app.add_subcommand("fuse", "Train the fused model on chunk embeddings");
  c_fuse->add_option("--model", fuse.model, "Unimodal model to start from");
  c_fuse->add_option("--embeddings", fuse.embeddings, "Embedding JSONL covering both tables")
      ->required();
  c_fuse->add_option("--train", fuse.train_csv, "Training feature table")->required();
  c_fuse->add_option("--val", fuse.val_csv, "Validation feature table")->required();
  c_fuse->add_option("--out", fuse.out, "Fused model output path")->required();
  c_fuse->add_flag("--fresh", fuse.fresh, "Start from fresh weights instead of --model");
  c_fuse->add_option("--hidden", fuse.hidden, "Hidden widths with --fresh")->delimiter(',');
  c_fuse->add_flag("--freeze-hidden", fuse.freeze_hidden, "Train only the fused head");
  fuse.flags.add_to(c_fuse);
  c_fuse->callback([&] { action = [&] { return fuse.run(); }; });

  EvalCmd eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a model on a feature table");
  c_eval->add_option("--model", eval.model, "Model file")->required();
  c_eval->add_option("--data", eval.data, "Feature table")->required();
  c_eval->add_option("--embeddings", eval.embeddings, "Embedding JSONL for a fused model");
  c_eval->add_flag("--allow-fallback", eval.allow_fallback,
                   "Answer rows without an embedding from the linguistic model");
  c_eval->add_option("--append-results", eval.append_results,
                     "Append a row to a results CSV for compare");
  c_eval->add_option("--name", eval.name, "Name for the results row");
  c_eval->add_option("--modality", eval.modality, "unimodal or multimodal (default: from model)");
  c_eval->callback([&] { action = [&] { return eval.run(); }; });

  AnalyzeCmd analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Classify a text and build its report");
  c_analyze->add_option("--text-file", analyze.text_file, "Plain-text file, - for stdin")->required();
  c_analyze->add_option("--model", analyze.model, "Model file")->required();
  c_analyze->add_option("--embeddings", analyze.embeddings, "Embedding JSONL keyed by chunk id");
  c_analyze->add_option("--resources", analyze.resources, "Resource directory");
  c_analyze->add_option("--token-budget", analyze.token_budget, "Tokens per chunk")
      ->capture_default_str()->check(CLI::PositiveNumber);
  c_analyze->add_flag("--json", analyze.as_json, "Print the report JSON");
  c_analyze->add_flag("--linguistics-only", analyze.linguistics_only,
                      "Ignore embeddings and use the linguistic model");
  c_analyze->add_flag("--allow-fallback", analyze.allow_fallback,
                      "Answer chunks without an embedding from the linguistic model");
  c_analyze->callback([&] { action = [&] { return analyze.run(); }; });

  CompareCmd compare;
  auto* c_compare = app.add_subcommand("compare", "Pareto front and paired t-tests over results");
  c_compare->add_option("--results", compare.results, "Results CSV")->required();
  c_compare->callback([&] { action = [&] { return compare.run(); }; });

  ServeCmd serve;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP service");
  c_serve->add_option("--config", serve.config_path, "key = value config file");
  c_serve->add_option("--model", serve.model, "Model file");
  c_serve->add_option("--embeddings", serve.embeddings, "Embedding JSONL");
  c_serve->add_option("--resources", serve.resources, "Resource directory");
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--port", serve.port, "Port (0 picks a free one)");
  c_serve->add_option("--token", serve.token, "Bearer token");
  c_serve->add_option("--threads", serve.threads, "Worker threads");
  c_serve->callback([&] { action = [&] { return serve.run(); }; });

  SchemaCmd schema;
  auto* c_schema = app.add_subcommand("schema", "Print the response JSON schema");
  c_schema->add_flag("--features", schema.features, "Print the feature schema instead");
  c_schema->callback([&] { action = [&] { return schema.run(); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
