// binhash: train/encode/query/eval/bench workflows for supervised discrete
// hashing (SDH, SDHR) and a random-hyperplane LSH baseline.

#include "binhash/data_io.hpp"
#include "binhash/embedding.hpp"
#include "binhash/hamming.hpp"
#include "binhash/metrics.hpp"
#include "binhash/model_io.hpp"
#include "binhash/sdh.hpp"
#include "binhash/sdhr.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace binhash;

namespace {

constexpr int kExitUsage = 2;

struct CliOptions {
  std::vector<std::string> methods;
  std::vector<int> bits;
  double lambda = 1.0;
  double v = 1e-5;
  int iters = 5;
  long long anchors = 1000;
  std::uint64_t seed = 1;
  double sigma = 0.0;
  double tol = 1e-5;
  int sweeps = 10;
  std::uint32_t radius = 2;
  long long top_n = 500;
  std::string data_images;
  std::string data_labels;
  std::string data_features;
  std::string data_format = "auto";  // auto | idx | csv
  long long classes = 0;             // 0: infer as max label + 1
  long long test_count = 1000;
  std::uint64_t split_seed = 42;
  std::string model_path;
  std::string codes_path;
  std::string out_path;
  std::string codes_out;
  std::string log_out;
  std::string subset = "all";  // encode/query row selection
  bool no_timing = false;
  bool quiet = false;
};

void apply_config_file(CliOptions& opt, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json cfg = json::parse(in);

  auto get = [&cfg](const char* key, auto& into) {
    if (cfg.contains(key)) into = cfg.at(key).template get<std::decay_t<decltype(into)>>();
  };
  if (cfg.contains("method")) {
    if (cfg["method"].is_array())
      opt.methods = cfg["method"].get<std::vector<std::string>>();
    else
      opt.methods = {cfg["method"].get<std::string>()};
  }
  if (cfg.contains("bits")) {
    if (cfg["bits"].is_array())
      opt.bits = cfg["bits"].get<std::vector<int>>();
    else
      opt.bits = {cfg["bits"].get<int>()};
  }
  get("lambda", opt.lambda);
  get("v", opt.v);
  get("iters", opt.iters);
  get("anchors", opt.anchors);
  get("seed", opt.seed);
  get("sigma", opt.sigma);
  get("tol", opt.tol);
  get("sweeps", opt.sweeps);
  get("radius", opt.radius);
  get("top_n", opt.top_n);
  get("data_images", opt.data_images);
  get("data_labels", opt.data_labels);
  get("data_features", opt.data_features);
  get("data_format", opt.data_format);
  get("classes", opt.classes);
  get("test_count", opt.test_count);
  get("split_seed", opt.split_seed);
  get("model", opt.model_path);
  get("codes", opt.codes_path);
  get("out", opt.out_path);
  get("codes_out", opt.codes_out);
  get("log_out", opt.log_out);
  get("subset", opt.subset);
  get("no_timing", opt.no_timing);
  get("quiet", opt.quiet);
}

void add_shared_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--method", opt.methods, "hashing method: sdhr | sdh | lsh (repeatable for bench)");
  cmd->add_option("--bits", opt.bits, "code length in bits (repeatable for bench)");
  cmd->add_option("--lambda", opt.lambda, "ridge weight on the label projection");
  cmd->add_option("--v", opt.v, "embedding-fit weight");
  cmd->add_option("--iters", opt.iters, "maximum training iterations");
  cmd->add_option("--anchors", opt.anchors, "number of RBF anchor points");
  cmd->add_option("--seed", opt.seed, "seed for all randomized stages");
  cmd->add_option("--sigma", opt.sigma, "kernel bandwidth override (<= 0: heuristic)");
  cmd->add_option("--tol", opt.tol, "relative objective-change stopping tolerance");
  cmd->add_option("--sweeps", opt.sweeps, "coordinate-descent sweeps per B-step");
  cmd->add_option("--radius", opt.radius, "Hamming lookup radius");
  cmd->add_option("--top-n", opt.top_n, "ranking depth for precision@N / query output");
  cmd->add_option("--data-images", opt.data_images, "IDX image file");
  cmd->add_option("--data-labels", opt.data_labels, "IDX or text label file");
  cmd->add_option("--data-features", opt.data_features, "feature CSV (one row per example)");
  cmd->add_option("--data-format", opt.data_format, "idx | csv | auto");
  cmd->add_option("--classes", opt.classes, "class count override (default: max label + 1)");
  cmd->add_option("--test-count", opt.test_count, "held-out query count");
  cmd->add_option("--split-seed", opt.split_seed, "train/test split seed");
  cmd->add_option("--model", opt.model_path, "SDHM model file");
  cmd->add_option("--codes", opt.codes_path, "BINC code database file");
  cmd->add_option("--out", opt.out_path, "output path (or prefix for eval)");
  cmd->add_flag("--no-timing", opt.no_timing, "report timing fields as 0 for reproducible outputs");
  cmd->add_flag("--quiet", opt.quiet, "suppress progress output");
}

Dataset load_dataset(const CliOptions& opt) {
  std::string format = opt.data_format;
  if (format == "auto") format = opt.data_features.empty() ? "idx" : "csv";
  Dataset ds;
  if (format == "idx") {
    if (opt.data_images.empty() || opt.data_labels.empty())
      throw CLI::ValidationError("--data-images and --data-labels are required for IDX input");
    ds = load_idx(opt.data_images, opt.data_labels);
  } else if (format == "csv") {
    if (opt.data_features.empty() || opt.data_labels.empty())
      throw CLI::ValidationError("--data-features and --data-labels are required for CSV input");
    ds = load_csv(opt.data_features, opt.data_labels);
  } else {
    throw CLI::ValidationError("unknown --data-format '" + format + "'");
  }
  if (opt.classes > 0) {
    if (ds.labels.num_classes > opt.classes)
      throw std::runtime_error("--classes " + std::to_string(opt.classes) + " contradicts the data (labels up to " +
                               std::to_string(ds.labels.num_classes - 1) + " present)");
    ds.labels.num_classes = static_cast<std::int32_t>(opt.classes);
  }
  return ds;
}

bool idx_input(const CliOptions& opt) {
  return opt.data_format == "idx" || (opt.data_format == "auto" && opt.data_features.empty());
}

TrainConfig make_train_config(const CliOptions& opt, int bits) {
  TrainConfig cfg;
  cfg.bits = bits;
  cfg.lambda = opt.lambda;
  cfg.v = opt.v;
  cfg.max_iters = opt.iters;
  cfg.anchors = static_cast<Index>(opt.anchors);
  cfg.seed = opt.seed;
  cfg.tol = opt.tol;
  cfg.sigma_override = opt.sigma;
  cfg.max_sweeps = opt.sweeps;
  cfg.verbose = !opt.quiet;
  return cfg;
}

void require_single_method(const CliOptions& opt, const std::string& verb) {
  if (opt.methods.size() != 1)
    throw CLI::ValidationError(verb + " needs exactly one --method");
}

void write_text_atomic(const std::string& path, const std::string& text) {
  detail::write_file_atomic(path, text.data(), text.size());
}

std::string sibling_path(const std::string& reference, const char* extension) {
  fs::path p(reference);
  p.replace_extension(extension);
  return p.string();
}

struct EvalInputs {
  const ModelFile* model = nullptr;          // null for lsh rows in bench
  const Matrix* lsh_hyperplanes = nullptr;   // set for lsh
  const CodeMatrix* db_codes = nullptr;
  const Dataset* train = nullptr;
  const Dataset* test = nullptr;
};

/// Encode the held-out queries, run the full retrieval + classification
/// protocol against the database codes, and fill a report.
MetricsReport run_eval(const EvalInputs& in, std::uint32_t radius, Index top_n) {
  const auto t0 = std::chrono::steady_clock::now();

  CodeMatrix query_codes;
  LabelVector predicted;
  if (in.model) {
    query_codes = encode_batch(in.test->features, in.model->embedding);
    predicted = predict(query_codes, in.model->w, effective_offset(*in.model));
  } else {
    query_codes = lsh_encode_batch(in.test->features, *in.lsh_hyperplanes);
  }

  CodeDatabase db = make_database(*in.db_codes, in.train->labels.labels);

  MetricsReport report;
  report.radius = radius;
  report.n_at = top_n;
  report.map = map_over_queries(db, query_codes, in.test->labels);
  const RadiusMetrics rm = radius_metrics(db, query_codes, in.test->labels, radius);
  report.precision_r = rm.precision;
  report.recall_r = rm.recall;
  report.f_measure_r = rm.f_measure;
  report.precision_at_n = precision_at_n(db, query_codes, in.test->labels, top_n);

  LabelVector nn_predicted;
  nn_predicted.num_classes = in.test->labels.num_classes;
  for (Index i = 0; i < query_codes.rows(); ++i)
    nn_predicted.labels.push_back(nearest_label(db, query_codes.row(i)));
  report.accuracy_1nn = classification_accuracy(nn_predicted, in.test->labels);
  report.accuracy = in.model ? classification_accuracy(predicted, in.test->labels) : report.accuracy_1nn;

  report.test_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

int cmd_train(CliOptions& opt) {
  require_single_method(opt, "train");
  if (opt.bits.size() != 1) throw CLI::ValidationError("train needs exactly one --bits value");
  const std::string& method = opt.methods.front();
  if (method == "lsh")
    throw CLI::ValidationError("lsh needs no training; use 'bench' for LSH comparisons");
  if (method != "sdh" && method != "sdhr")
    throw CLI::ValidationError("unknown method '" + method + "' (expected sdhr, sdh, or lsh)");
  if (opt.out_path.empty()) throw CLI::ValidationError("train requires --out");

  const Dataset full = load_dataset(opt);
  const TrainTestSplit parts = split(full, {static_cast<Index>(opt.test_count), opt.split_seed});
  if (!opt.quiet)
    std::fprintf(stderr, "[train] %lld train / %lld test examples, d=%lld, c=%d\n",
                 static_cast<long long>(parts.train.rows()), static_cast<long long>(parts.test.rows()),
                 static_cast<long long>(full.dim()), full.labels.num_classes);

  const TrainConfig cfg = make_train_config(opt, opt.bits.front());
  TrainLog log;
  ModelFile file;
  CodeMatrix train_codes;
  if (method == "sdhr") {
    SdhrModel model = train_sdhr(parts.train, cfg, &log);
    train_codes = std::move(model.train_codes);
    file = to_model_file(model, cfg, opt.split_seed, idx_input(opt));
  } else {
    SdhModel model = train_sdh(parts.train, cfg, &log);
    train_codes = std::move(model.train_codes);
    file = to_model_file(model, cfg, opt.split_seed, idx_input(opt));
  }

  save_model(file, opt.out_path);
  const std::string codes_path = opt.codes_out.empty() ? sibling_path(opt.out_path, ".binc") : opt.codes_out;
  save_codes(train_codes, codes_path);

  json jlog = {{"method", method},
               {"bits", cfg.bits},
               {"objectives", log.objectives},
               {"iterations", log.iterations},
               {"train_seconds", opt.no_timing ? 0.0 : log.train_seconds},
               {"sigma", file.embedding.sigma},
               {"config",
                {{"lambda", cfg.lambda},
                 {"v", cfg.v},
                 {"iters", cfg.max_iters},
                 {"anchors", cfg.anchors},
                 {"seed", cfg.seed},
                 {"split_seed", opt.split_seed},
                 {"test_count", opt.test_count},
                 {"tol", cfg.tol},
                 {"sweeps", cfg.max_sweeps},
                 {"sigma_override", cfg.sigma_override}}}};
  const std::string log_path = opt.log_out.empty() ? sibling_path(opt.out_path, ".train.json") : opt.log_out;
  write_text_atomic(log_path, jlog.dump(2) + "\n");

  if (!opt.quiet)
    std::fprintf(stderr, "[train] wrote %s, %s, %s (%.1fs)\n", opt.out_path.c_str(), codes_path.c_str(),
                 log_path.c_str(), log.train_seconds);
  return 0;
}

int cmd_encode(CliOptions& opt) {
  if (opt.model_path.empty()) throw CLI::ValidationError("encode requires --model");
  if (opt.out_path.empty()) throw CLI::ValidationError("encode requires --out");
  const ModelFile model = load_model(opt.model_path);
  const Dataset full = load_dataset(opt);

  CodeMatrix codes;
  if (opt.subset == "all") {
    codes = encode_batch(full.features, model.embedding);
  } else if (opt.subset == "train" || opt.subset == "test") {
    const TrainTestSplit parts = split(full, {static_cast<Index>(opt.test_count), opt.split_seed});
    codes = encode_batch(opt.subset == "train" ? parts.train.features : parts.test.features, model.embedding);
  } else {
    throw CLI::ValidationError("--subset must be all, train, or test");
  }
  save_codes(codes, opt.out_path);
  if (!opt.quiet)
    std::fprintf(stderr, "[encode] wrote %lld codes (%d bits) to %s\n",
                 static_cast<long long>(codes.rows()), codes.bits(), opt.out_path.c_str());
  return 0;
}

int cmd_query(CliOptions& opt) {
  if (opt.model_path.empty()) throw CLI::ValidationError("query requires --model");
  if (opt.codes_path.empty()) throw CLI::ValidationError("query requires --codes");
  const ModelFile model = load_model(opt.model_path);
  const CodeMatrix db_codes = load_codes(opt.codes_path);
  const CodeDatabase db = make_database(db_codes);

  const Dataset full = load_dataset(opt);
  Matrix query_features;
  if (opt.subset == "test") {
    const TrainTestSplit parts = split(full, {static_cast<Index>(opt.test_count), opt.split_seed});
    query_features = parts.test.features;
  } else if (opt.subset == "all") {
    query_features = full.features;
  } else {
    throw CLI::ValidationError("query --subset must be test or all");
  }
  const CodeMatrix query_codes = encode_batch(query_features, model.embedding);
  if (query_codes.bits() != db.codes.bits())
    throw std::runtime_error("query/database code width mismatch");

  std::string out = "query,rank,id,distance\n";
  const bool use_radius = opt.top_n <= 0;
  for (Index qi = 0; qi < query_codes.rows(); ++qi) {
    const std::vector<SearchHit> hits = use_radius
                                            ? lookup_radius(db, query_codes.row(qi), opt.radius)
                                            : rank_topn(db, query_codes.row(qi), static_cast<Index>(opt.top_n));
    for (std::size_t rank = 0; rank < hits.size(); ++rank) {
      char line[96];
      std::snprintf(line, sizeof(line), "%lld,%zu,%u,%u\n", static_cast<long long>(qi), rank,
                    db.ids[hits[rank].index], hits[rank].distance);
      out += line;
    }
  }
  if (opt.out_path.empty())
    std::fputs(out.c_str(), stdout);
  else
    write_text_atomic(opt.out_path, out);
  return 0;
}

int cmd_eval(CliOptions& opt) {
  if (opt.model_path.empty()) throw CLI::ValidationError("eval requires --model");
  if (opt.codes_path.empty()) throw CLI::ValidationError("eval requires --codes (training codes from train)");
  if (opt.out_path.empty()) throw CLI::ValidationError("eval requires --out (output prefix)");

  const ModelFile model = load_model(opt.model_path);
  const CodeMatrix db_codes = load_codes(opt.codes_path);
  const Dataset full = load_dataset(opt);
  const TrainTestSplit parts = split(full, {static_cast<Index>(opt.test_count), opt.split_seed});
  if (db_codes.rows() != parts.train.rows())
    throw std::runtime_error("code database size (" + std::to_string(db_codes.rows()) +
                             ") does not match the training split (" + std::to_string(parts.train.rows()) +
                             "); check --test-count/--split-seed");
  if (db_codes.bits() != model.config.bits)
    throw std::runtime_error("code database width does not match the model");
  if (full.dim() != model.embedding.dim())
    throw std::runtime_error("dataset dimension does not match the model");

  EvalInputs in;
  in.model = &model;
  in.db_codes = &db_codes;
  in.train = &parts.train;
  in.test = &parts.test;
  MetricsReport report = run_eval(in, opt.radius, static_cast<Index>(opt.top_n));
  if (opt.no_timing) report.test_seconds = 0.0;

  const std::string method = model.kind == ModelKind::sdhr ? "sdhr" : "sdh";
  const std::string csv = metrics_csv_header() + "\n" + metrics_csv_row(method, model.config.bits, report) + "\n";
  write_text_atomic(opt.out_path + ".csv", csv);
  write_text_atomic(opt.out_path + ".json", metrics_json(method, model.config.bits, report).dump(2) + "\n");
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int cmd_bench(CliOptions& opt) {
  if (opt.methods.empty()) throw CLI::ValidationError("bench requires at least one --method");
  if (opt.bits.empty()) throw CLI::ValidationError("bench requires at least one --bits value");
  if (opt.out_path.empty()) throw CLI::ValidationError("bench requires --out");
  for (const std::string& m : opt.methods)
    if (m != "sdh" && m != "sdhr" && m != "lsh")
      throw CLI::ValidationError("unknown method '" + m + "' (expected sdhr, sdh, or lsh)");

  const Dataset full = load_dataset(opt);
  const TrainTestSplit parts = split(full, {static_cast<Index>(opt.test_count), opt.split_seed});

  std::string csv = metrics_csv_header() + "\n";
  for (const std::string& method : opt.methods) {
    for (int bits : opt.bits) {
      if (!opt.quiet) std::fprintf(stderr, "[bench] %s @ %d bits\n", method.c_str(), bits);
      const TrainConfig cfg = make_train_config(opt, bits);
      MetricsReport report;
      if (method == "lsh") {
        const auto t0 = std::chrono::steady_clock::now();
        const Matrix hyperplanes = make_lsh_hyperplanes(bits, full.dim(), cfg.seed);
        const CodeMatrix db_codes = lsh_encode_batch(parts.train.features, hyperplanes);
        const double train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        EvalInputs in;
        in.lsh_hyperplanes = &hyperplanes;
        in.db_codes = &db_codes;
        in.train = &parts.train;
        in.test = &parts.test;
        report = run_eval(in, opt.radius, static_cast<Index>(opt.top_n));
        report.train_seconds = train_s;
      } else {
        TrainLog log;
        ModelFile file;
        CodeMatrix db_codes;
        if (method == "sdhr") {
          SdhrModel model = train_sdhr(parts.train, cfg, &log);
          db_codes = std::move(model.train_codes);
          file = to_model_file(model, cfg, opt.split_seed, idx_input(opt));
        } else {
          SdhModel model = train_sdh(parts.train, cfg, &log);
          db_codes = std::move(model.train_codes);
          file = to_model_file(model, cfg, opt.split_seed, idx_input(opt));
        }
        EvalInputs in;
        in.model = &file;
        in.db_codes = &db_codes;
        in.train = &parts.train;
        in.test = &parts.test;
        report = run_eval(in, opt.radius, static_cast<Index>(opt.top_n));
        report.train_seconds = log.train_seconds;
      }
      if (opt.no_timing) {
        report.train_seconds = 0.0;
        report.test_seconds = 0.0;
      }
      csv += metrics_csv_row(method, bits, report) + "\n";
    }
  }
  write_text_atomic(opt.out_path, csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliOptions opt;

  // --config is honored before flag parsing so explicit flags override it.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        apply_config_file(opt, argv[i + 1]);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
      }
    }
  }

  CLI::App app{"supervised discrete hashing: training, encoding, retrieval, evaluation"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");

  CLI::App* train = app.add_subcommand("train", "train a hashing model and write SDHM + BINC files");
  CLI::App* encode = app.add_subcommand("encode", "encode a dataset with a trained model");
  CLI::App* query = app.add_subcommand("query", "rank database codes against encoded queries");
  CLI::App* eval = app.add_subcommand("eval", "run the retrieval/classification evaluation protocol");
  CLI::App* bench = app.add_subcommand("bench", "compare methods across bit lengths into one CSV");
  for (CLI::App* cmd : {train, encode, query, eval, bench}) {
    add_shared_flags(cmd, opt);
    cmd->add_option("--codes-out", opt.codes_out, "where train writes the optimized training codes");
    cmd->add_option("--log-out", opt.log_out, "where train writes the objective log");
    cmd->add_option("--subset", opt.subset, "rows to encode/query: all | train | test");
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand(train)) return cmd_train(opt);
    if (app.got_subcommand(encode)) return cmd_encode(opt);
    if (app.got_subcommand(query)) return cmd_query(opt);
    if (app.got_subcommand(eval)) return cmd_eval(opt);
    if (app.got_subcommand(bench)) return cmd_bench(opt);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitUsage;
}
