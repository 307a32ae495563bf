// selfenc: command-line frontend for the self-encoder library.
//
// Subcommands: train, rank, classify, cv, bench, invariance, voronoi,
// fixtures. Every command accepts --seed (default 0, overridable through the
// SELFENC_SEED environment variable; an explicit flag wins) and --config
// <file> with `key = value` lines in the same format as a schema sidecar.
// Exit codes: 0 success, 1 runtime failure, 2 bad flags.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "selfenc/selfenc.hpp"

namespace {

using namespace selfenc;

// ---------------------------------------------------------------------------
// Small parsing helpers.

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::string token;
  std::istringstream iss(text);
  while (std::getline(iss, token, ',')) {
    token = detail::trim(token);
    double v = 0.0;
    if (!detail::parse_cell_double(token, v))
      throw std::invalid_argument("cannot parse '" + token + "' as a number in '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list '" + text + "'");
  return out;
}

Matrix parse_point_list(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::string part;
  std::istringstream iss(text);
  while (std::getline(iss, part, ';'))
    if (!detail::trim(part).empty()) rows.push_back(parse_number_list(part));
  if (rows.empty()) throw std::invalid_argument("no points in '" + text + "'");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols)
      throw std::invalid_argument("point " + std::to_string(i + 1) + " has " +
                                  std::to_string(rows[i].size()) + " coordinates, expected " +
                                  std::to_string(m.cols));
    std::copy(rows[i].begin(), rows[i].end(), m.row_ptr(i));
  }
  return m;
}

// Transform specs: identity | scale-first-feature:<s> | matrix:<file>.
// A matrix file holds d*d whitespace-separated entries (row-major M), or
// d*d + d entries (M followed by the offset v).
AffineTransform parse_transform(const std::string& spec, std::size_t d) {
  if (spec == "identity") return AffineTransform::identity(d);
  const std::string scale_prefix = "scale-first-feature:";
  if (spec.rfind(scale_prefix, 0) == 0) {
    double s = 0.0;
    const std::string rest = spec.substr(scale_prefix.size());
    if (!detail::parse_cell_double(rest, s) || s == 0.0)
      throw std::invalid_argument("bad scale in transform spec '" + spec + "'");
    AffineTransform t = AffineTransform::identity(d);
    t.m(0, 0) = s;
    return t;
  }
  const std::string matrix_prefix = "matrix:";
  if (spec.rfind(matrix_prefix, 0) == 0) {
    const std::string path = spec.substr(matrix_prefix.size());
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open transform file " + path);
    std::vector<double> values;
    double v = 0.0;
    while (is >> v) values.push_back(v);
    if (!is.eof()) throw std::runtime_error("junk in transform file " + path);
    AffineTransform t = AffineTransform::identity(d);
    if (values.size() == d * d) {
      std::copy(values.begin(), values.end(), t.m.data.begin());
    } else if (values.size() == d * d + d) {
      std::copy(values.begin(), values.begin() + static_cast<long>(d * d), t.m.data.begin());
      std::copy(values.begin() + static_cast<long>(d * d), values.end(), t.v.begin());
    } else {
      throw std::runtime_error("transform file " + path + " holds " +
                               std::to_string(values.size()) + " numbers; expected " +
                               std::to_string(d * d) + " or " + std::to_string(d * d + d) +
                               " for dimension " + std::to_string(d));
    }
    return t;
  }
  throw std::invalid_argument("unknown transform spec '" + spec +
                              "' (use identity, scale-first-feature:<s> or matrix:<file>)");
}

// ---------------------------------------------------------------------------
// Shared flag bundles.

struct ModelFlags {
  std::vector<std::size_t> hidden;
  std::string normalization = "softmax";
  double lr = 0.1;
  double decay = 0.995;
  std::size_t epochs = 2000;
  std::size_t patience = 50;
  double min_improvement = 1e-5;
  std::size_t sample = 0;  // 0 = train on every sample

  SelfEncoderConfig to_config(std::uint64_t seed) const {
    SelfEncoderConfig cfg;
    cfg.hidden_dims = hidden;
    cfg.output_normalization = activation_from_name(normalization);
    cfg.schedule.initial_lr = lr;
    cfg.schedule.lr_decay = decay;
    cfg.schedule.max_epochs = epochs;
    cfg.schedule.patience = patience;
    cfg.schedule.min_improvement = min_improvement;
    if (sample > 0) cfg.sample_size = sample;
    cfg.seed = seed;
    return cfg;
  }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--hidden", f.hidden, "Hidden layer sizes, comma separated (default: none)")
      ->delimiter(',');
  cmd->add_option("--normalization", f.normalization, "Output normalization")
      ->check(CLI::IsMember({"softmax", "sigmoid"}))
      ->capture_default_str();
  cmd->add_option("--lr", f.lr, "Initial learning rate")->capture_default_str();
  cmd->add_option("--decay", f.decay, "Per-epoch learning-rate decay")->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Maximum training epochs")->capture_default_str();
  cmd->add_option("--patience", f.patience, "Early-stopping patience in epochs")
      ->capture_default_str();
  cmd->add_option("--min-improvement", f.min_improvement,
                  "Loss improvement that resets the patience counter")
      ->capture_default_str();
  cmd->add_option("--sample", f.sample, "Train on a random subset of this size (0 = all rows)")
      ->capture_default_str();
}

void add_common_flags(CLI::App* cmd, std::uint64_t& seed, std::string& config) {
  cmd->add_option("--seed", seed, "Random seed (env SELFENC_SEED; the flag wins)")
      ->envname("SELFENC_SEED")
      ->capture_default_str();
  cmd->add_option("--config", config,
                  "Fill unset flags from a key = value file (schema-sidecar format)");
}

// "Flags over config files": a config entry only lands on options that the
// command line and the environment both left untouched.
void apply_config(CLI::App* cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string text = detail::trim(line.substr(0, line.find('#')));
    if (text.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(where + ": expected 'key = value', got '" + text + "'");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error(where + ": expected 'key = value', got '" + text + "'");
    if (key == "config") throw std::runtime_error(where + ": config files cannot nest");
    CLI::Option* op = cmd->get_option_no_throw("--" + key);
    if (op == nullptr)
      throw std::runtime_error(where + ": no option --" + key + " on this command");
    if (op->count() > 0) continue;
    op->add_result(value);
    op->run_callback();
  }
}

double model_training_loss(const SelfEncoderModel& model) {
  std::vector<std::size_t> targets(model.anchor_indices.size());
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = i;
  const LayerCache cache = forward(model.network, model.anchor_features);
  return bce_loss(cache.output(), targets);
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

// ---------------------------------------------------------------------------
// Command implementations. Each returns normally on success and throws on
// failure; main() maps exceptions to exit codes.

struct TrainArgs {
  std::string data, schema, out;
  ModelFlags model;
  std::uint64_t seed = 0;
  std::string config;
};

void cmd_train(const TrainArgs& a) {
  const Dataset d = load_csv(a.data, load_schema(a.schema));
  const SelfEncoderModel model = fit(d.features, a.model.to_config(a.seed));
  save_model(model, a.out);
  std::cout << "trained self-encoder on " << d.name << ": " << d.size() << " samples, "
            << model.anchor_indices.size() << " anchors, dimension " << d.dim() << "\n"
            << "training loss " << std::setprecision(6) << model_training_loss(model)
            << ", saved to " << a.out << "\n";
}

struct RankArgs {
  std::string model_path, query;
  std::size_t top = 5;
  std::uint64_t seed = 0;
  std::string config;
};

void cmd_rank(const RankArgs& a) {
  const SelfEncoderModel model = load_model(a.model_path);
  const std::vector<double> x = parse_number_list(a.query);
  const NeighborRanking ranking = rank_neighbors(model, x);
  const std::size_t top = a.top == 0 ? ranking.size() : std::min(a.top, ranking.size());
  for (std::size_t r = 0; r < top; ++r)
    std::cout << "rank " << r + 1 << ": anchor " << ranking[r].anchor_index << "  p="
              << std::setprecision(6) << ranking[r].probability << "\n";
}

struct ClassifyArgs {
  std::string model_path, data, schema;
  std::vector<std::string> queries;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::string config;
};

void cmd_classify(const ClassifyArgs& a) {
  const SelfEncoderModel model = load_model(a.model_path);
  const Dataset d = load_csv(a.data, load_schema(a.schema));
  for (const std::string& q : a.queries) {
    const std::vector<double> x = parse_number_list(q);
    const int label = se_knn_predict(model, d.labels, x, a.k);
    std::cout << q << " -> class " << label;
    if (label >= 0 && static_cast<std::size_t>(label) < d.class_names.size())
      std::cout << " (" << d.class_names[static_cast<std::size_t>(label)] << ")";
    std::cout << "\n";
  }
}

Method make_method(const std::string& name, const ModelFlags& flags, std::size_t k) {
  if (name == "knn") return euclidean_knn_method(k);
  if (name == "knn-normalized") return euclidean_knn_normalized_method(k);
  if (name == "se") {
    SeMethodOptions opts;
    opts.hidden_dims = flags.hidden;
    if (flags.sample > 0) opts.sample_size = flags.sample;
    opts.k = k;
    opts.schedule.initial_lr = flags.lr;
    opts.schedule.lr_decay = flags.decay;
    opts.schedule.max_epochs = flags.epochs;
    opts.schedule.patience = flags.patience;
    opts.schedule.min_improvement = flags.min_improvement;
    return se_method(flags.sample > 0 ? "se-sample" : "se", opts);
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

struct CvArgs {
  std::string data, schema, method = "se", out = "cv-report.json";
  std::size_t k = 5, folds = 5, trials = 20;
  ModelFlags model;
  std::uint64_t seed = 0;
  std::string config;
};

void cmd_cv(const CvArgs& a) {
  const Dataset d = load_csv(a.data, load_schema(a.schema));
  const Method m = make_method(a.method, a.model, a.k);
  const CVReport r = cross_validate(d, m, a.folds, a.trials, a.seed);
  nlohmann::ordered_json report;
  report["seed"] = a.seed;
  report["folds"] = a.folds;
  report["trials"] = r.trials;
  nlohmann::ordered_json entry;
  entry["dataset"] = d.name;
  entry["samples"] = d.size();
  entry["features"] = d.dim();
  entry["classes"] = d.class_count();
  entry["methods"] = nlohmann::ordered_json::array({report_to_json(r)});
  report["results"] = nlohmann::ordered_json::array({entry});
  write_report(report, a.out);
  std::cout << "cv " << d.name << " " << m.name << ": mean=" << std::setprecision(4) << r.mean
            << " std=" << r.stddev << " folds=" << r.folds << " (report: " << a.out << ")\n";
}

struct BenchArgs {
  std::vector<std::string> data, schemas;
  std::vector<std::string> methods{"se", "knn", "knn-normalized"};
  std::string out = "bench-report.json";
  std::size_t k = 5, folds = 5, trials = 20;
  ModelFlags model;
  std::uint64_t seed = 0;
  std::string config;
};

void cmd_bench(const BenchArgs& a) {
  if (a.data.size() != a.schemas.size())
    throw std::invalid_argument("got " + std::to_string(a.data.size()) + " --data but " +
                                std::to_string(a.schemas.size()) + " --schema");
  std::vector<DatasetSource> sources;
  for (std::size_t i = 0; i < a.data.size(); ++i) sources.push_back({a.data[i], a.schemas[i]});
  std::vector<Method> methods;
  for (const std::string& name : a.methods) methods.push_back(make_method(name, a.model, a.k));
  const nlohmann::ordered_json report = run_benchmark(sources, methods, a.folds, a.trials, a.seed);
  write_report(report, a.out);
  for (const auto& entry : report["results"]) {
    if (entry.contains("error")) {
      std::cout << entry["dataset"].get<std::string>()
                << ": error: " << entry["error"].get<std::string>() << "\n";
      continue;
    }
    for (const auto& m : entry["methods"])
      std::cout << entry["dataset"].get<std::string>() << " "
                << m["method"].get<std::string>() << ": mean=" << std::setprecision(4)
                << m["mean"].get<double>() << " std=" << m["std"].get<double>() << "\n";
  }
  std::cout << "report: " << a.out << "\n";
}

struct InvarianceArgs {
  std::string data, schema, transform = "identity";
  std::size_t folds = 5, trials = 5, k = 5;
  ModelFlags model;
  std::uint64_t seed = 0;
  std::string config;
};

void cmd_invariance(const InvarianceArgs& a) {
  const Dataset d = load_csv(a.data, load_schema(a.schema));
  const AffineTransform t = parse_transform(a.transform, d.dim());

  // Constructive check on a held-out fifth of the data: transfer the trained
  // weights through the transform and compare outputs element by element.
  Rng rng(a.seed);
  Rng fold_rng = rng.child(0);
  const FoldSplit split = stratified_kfold(d, 5, fold_rng);
  const Dataset train = select_rows(d, split.train_indices(0, d.size()));
  const Dataset test = select_rows(d, split.test_folds[0]);
  const SelfEncoderModel model = fit(train.features, a.model.to_config(rng.child_seed(1)));
  const SelfEncoderModel moved = transfer_weights(model, t);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::vector<double> x = test.features.row_copy(i);
    const Matrix fx = predict(model.network, Matrix::row_vector(x));
    const Matrix fy = predict(moved.network, Matrix::row_vector(t.apply(x)));
    max_dev = std::max(max_dev, max_abs_diff(fx, fy));
  }
  std::cout << "constructive check: max |f(x) - f~(Mx+v)| over " << test.size()
            << " held-out samples = " << std::setprecision(3) << std::scientific << max_dev
            << std::defaultfloat << "\n";

  // Retrain check: cross-validate on the raw and transformed data.
  const Dataset moved_data = affine_transform(d, t);
  const Method se = make_method("se", a.model, a.k);
  const Method knn = make_method("knn", a.model, a.k);
  const double se_raw = cross_validate(d, se, a.folds, a.trials, a.seed).mean;
  const double se_moved = cross_validate(moved_data, se, a.folds, a.trials, a.seed).mean;
  const double knn_raw = cross_validate(d, knn, a.folds, a.trials, a.seed).mean;
  const double knn_moved = cross_validate(moved_data, knn, a.folds, a.trials, a.seed).mean;
  std::cout << std::setprecision(4) << "retrain check (SE-kNN):    raw=" << se_raw
            << "  transformed=" << se_moved << "\n"
            << "baseline (Euclidean kNN):  raw=" << knn_raw << "  transformed=" << knn_moved
            << "\n";
}

struct VoronoiArgs {
  std::string case_name, data, schema, points_text, transform;
  std::string metric = "both";
  std::string out = "voronoi.ppm";
  std::size_t width = 400, height = 400;
  double pad = 0.2;
  ModelFlags model;
  std::uint64_t seed = 0;
  std::string config;
};

void cmd_voronoi(const VoronoiArgs& a) {
  Matrix points(1, 1);
  if (a.case_name == "square") {
    points = fixtures::square_points();
  } else if (!a.points_text.empty()) {
    points = parse_point_list(a.points_text);
  } else if (!a.data.empty()) {
    const Dataset d = load_csv(a.data, load_schema(a.schema));
    points = d.features;
  } else {
    throw std::invalid_argument("need --case square, --points or --data/--schema");
  }
  if (points.cols != 2)
    throw std::invalid_argument("region diagrams need 2-D points, got dimension " +
                                std::to_string(points.cols));

  // With a transform, the Euclidean diagram is recomputed on the moved
  // points while the self-encoder diagram reuses the model trained on the
  // original points, transferred through the transform.
  SelfEncoderModel model;
  const bool want_se = a.metric == "se" || a.metric == "both";
  if (want_se) model = fit(points, a.model.to_config(a.seed));
  Matrix drawn_points = points;
  if (!a.transform.empty()) {
    const AffineTransform t = parse_transform(a.transform, 2);
    drawn_points = affine_transform(fixtures::make_dataset("pts", points,
                                                           std::vector<int>(points.rows, 0)),
                                    t)
                       .features;
    if (want_se) model = transfer_weights(model, t);
  }
  const GridSpec grid = GridSpec::around_points(drawn_points, a.pad, a.width, a.height);

  if (a.metric == "euclidean" || a.metric == "both") {
    const std::string path =
        a.metric == "both" ? with_suffix(a.out, "-euclidean") : a.out;
    save_region_map(region_map_euclidean(drawn_points, grid), path);
    std::cout << "euclidean diagram: " << path << "\n";
  }
  if (want_se) {
    const std::string path = a.metric == "both" ? with_suffix(a.out, "-se") : a.out;
    save_region_map(region_map_self_encoder(model, grid), path);
    std::cout << "self-encoder diagram: " << path << "\n";
  }
}

struct FixturesArgs {
  std::string case_name = "categorical";
  ModelFlags model;
  std::uint64_t seed = 0;
  std::string config;
};

void print_ranking_table(const Matrix& x, const std::vector<double>& query,
                         const NeighborRanking& ranking) {
  std::cout << "  query (" ;
  for (std::size_t j = 0; j < query.size(); ++j)
    std::cout << (j ? "," : "") << query[j];
  std::cout << ")\n";
  for (const RankedNeighbor& r : ranking) {
    std::cout << "    anchor " << r.anchor_index << " (";
    for (std::size_t j = 0; j < x.cols; ++j)
      std::cout << (j ? "," : "") << x(r.anchor_index, j);
    std::cout << ")  p=" << std::setprecision(4) << r.probability << "\n";
  }
}

void cmd_fixtures(const FixturesArgs& a) {
  if (a.case_name == "square") {
    const Matrix pts = fixtures::square_points();
    std::cout << "square corners:\n";
    for (std::size_t i = 0; i < pts.rows; ++i)
      std::cout << "  " << i << ": (" << pts(i, 0) << ", " << pts(i, 1) << ")\n";
    const SelfEncoderModel model = fit(pts, a.model.to_config(a.seed));
    const GridSpec grid = GridSpec::around_points(pts, 0.2, 200, 200);
    const double agree = region_agreement(region_map_euclidean(pts, grid),
                                          region_map_self_encoder(model, grid));
    std::cout << "region agreement (euclidean vs self-encoder, 200x200): "
              << std::setprecision(4) << agree << "\n";
    return;
  }
  if (a.case_name != "categorical")
    throw std::invalid_argument("unknown fixtures case '" + a.case_name +
                                "' (use categorical or square)");

  bool ok = true;
  const auto run_case = [&](const std::string& title, const Matrix& x,
                            const std::vector<double>& query, std::size_t expect_top) {
    std::cout << title << "\n";
    const SelfEncoderModel model = fit(x, a.model.to_config(a.seed));
    const NeighborRanking ranking = rank_neighbors(model, query);
    print_ranking_table(x, query, ranking);
    const std::vector<std::size_t> near = nearest_set(x, query);
    std::cout << "  euclidean nearest set: {";
    for (std::size_t i = 0; i < near.size(); ++i) std::cout << (i ? "," : "") << near[i];
    std::cout << "}\n";
    if (ranking.front().anchor_index != expect_top) {
      std::cout << "  UNEXPECTED: top-ranked anchor is " << ranking.front().anchor_index
                << ", expected " << expect_top << "\n";
      ok = false;
    } else {
      std::cout << "  top-ranked anchor " << expect_top << " as expected\n";
    }
  };

  run_case("first table (4 one-hot columns):", fixtures::categorical_x1(), fixtures::x1_query(),
           2);
  run_case("second table (5 one-hot columns, same categories spelled out):",
           fixtures::categorical_x2(), fixtures::x2_query(), 2);

  // In the second table the extra bit makes three rows equidistant from the
  // query, while the learned ranking still singles one out.
  const std::vector<std::size_t> tie = nearest_set(fixtures::categorical_x2(),
                                                   fixtures::x2_query());
  if (tie != std::vector<std::size_t>{2, 3, 4}) {
    std::cout << "UNEXPECTED: euclidean tie set differs from {2,3,4}\n";
    ok = false;
  }
  if (!ok) throw std::runtime_error("fixtures: outcome differed from the documented behavior");
  std::cout << "all fixture checks passed\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-encoder toolkit: similarity learning without a metric"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train a self-encoder and save the model");
  train->add_option("--data", train_args.data, "Training CSV")->required();
  train->add_option("--schema", train_args.schema, "Schema sidecar")->required();
  train->add_option("--out", train_args.out, "Model output path")->required();
  add_model_flags(train, train_args.model);
  add_common_flags(train, train_args.seed, train_args.config);
  train->callback([&, train] {
    apply_config(train, train_args.config);
    cmd_train(train_args);
  });

  RankArgs rank_args;
  CLI::App* rank = app.add_subcommand("rank", "Rank anchors for a query point");
  rank->add_option("--model", rank_args.model_path, "Saved model")->required();
  rank->add_option("--query", rank_args.query, "Comma-separated coordinates")->required();
  rank->add_option("--top", rank_args.top, "How many anchors to print (0 = all)")
      ->capture_default_str();
  add_common_flags(rank, rank_args.seed, rank_args.config);
  rank->callback([&, rank] {
    apply_config(rank, rank_args.config);
    cmd_rank(rank_args);
  });

  ClassifyArgs classify_args;
  CLI::App* classify = app.add_subcommand("classify", "Classify queries with SE-kNN");
  classify->add_option("--model", classify_args.model_path, "Saved model")->required();
  classify->add_option("--data", classify_args.data, "CSV the model was trained on (labels)")
      ->required();
  classify->add_option("--schema", classify_args.schema, "Schema sidecar")->required();
  classify->add_option("--query", classify_args.queries, "Comma-separated coordinates")
      ->required();
  classify->add_option("--k", classify_args.k, "Vote among the top-k anchors")
      ->capture_default_str();
  add_common_flags(classify, classify_args.seed, classify_args.config);
  classify->callback([&, classify] {
    apply_config(classify, classify_args.config);
    cmd_classify(classify_args);
  });

  CvArgs cv_args;
  CLI::App* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv->add_option("--data", cv_args.data, "Dataset CSV")->required();
  cv->add_option("--schema", cv_args.schema, "Schema sidecar")->required();
  cv->add_option("--method", cv_args.method, "Method to evaluate")
      ->check(CLI::IsMember({"se", "knn", "knn-normalized"}))
      ->capture_default_str();
  cv->add_option("--k", cv_args.k, "Neighbors per vote")->capture_default_str();
  cv->add_option("--folds", cv_args.folds, "Number of folds")->capture_default_str();
  cv->add_option("--trials", cv_args.trials, "Hyperparameter draws per fold")
      ->capture_default_str();
  cv->add_option("--out", cv_args.out, "Report path")->capture_default_str();
  add_model_flags(cv, cv_args.model);
  add_common_flags(cv, cv_args.seed, cv_args.config);
  cv->callback([&, cv] {
    apply_config(cv, cv_args.config);
    cmd_cv(cv_args);
  });

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Benchmark methods across datasets");
  bench->add_option("--data", bench_args.data, "Dataset CSVs (repeatable)")->required();
  bench->add_option("--schema", bench_args.schemas, "Schema sidecars (one per --data)")
      ->required();
  bench->add_option("--methods", bench_args.methods, "Methods, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--k", bench_args.k, "Neighbors per vote")->capture_default_str();
  bench->add_option("--folds", bench_args.folds, "Number of folds")->capture_default_str();
  bench->add_option("--trials", bench_args.trials, "Hyperparameter draws per fold")
      ->capture_default_str();
  bench->add_option("--out", bench_args.out, "Report path")->capture_default_str();
  add_model_flags(bench, bench_args.model);
  add_common_flags(bench, bench_args.seed, bench_args.config);
  bench->callback([&, bench] {
    apply_config(bench, bench_args.config);
    cmd_bench(bench_args);
  });

  InvarianceArgs inv_args;
  CLI::App* inv = app.add_subcommand(
      "invariance", "Show affine invariance: constructive weight transfer vs retraining");
  inv->add_option("--data", inv_args.data, "Dataset CSV")->required();
  inv->add_option("--schema", inv_args.schema, "Schema sidecar")->required();
  inv->add_option("--transform", inv_args.transform,
                  "identity | scale-first-feature:<s> | matrix:<file>")
      ->capture_default_str();
  inv->add_option("--folds", inv_args.folds, "Folds for the retrain check")
      ->capture_default_str();
  inv->add_option("--trials", inv_args.trials, "Hyperparameter draws per fold")
      ->capture_default_str();
  inv->add_option("--k", inv_args.k, "Neighbors per vote")->capture_default_str();
  add_model_flags(inv, inv_args.model);
  add_common_flags(inv, inv_args.seed, inv_args.config);
  inv->callback([&, inv] {
    apply_config(inv, inv_args.config);
    cmd_invariance(inv_args);
  });

  VoronoiArgs vor_args;
  CLI::App* vor = app.add_subcommand("voronoi", "Render nearest-anchor region diagrams");
  vor->add_option("--case", vor_args.case_name, "Built-in case (square)")
      ->check(CLI::IsMember({"square"}));
  vor->add_option("--points", vor_args.points_text, "Inline points: x,y;x,y;...");
  vor->add_option("--data", vor_args.data, "2-D dataset CSV");
  vor->add_option("--schema", vor_args.schema, "Schema sidecar");
  vor->add_option("--metric", vor_args.metric, "euclidean | se | both")
      ->check(CLI::IsMember({"euclidean", "se", "both"}))
      ->capture_default_str();
  vor->add_option("--out", vor_args.out, "Output image (.ppm or .svg)")->capture_default_str();
  vor->add_option("--width", vor_args.width, "Grid width in pixels")->capture_default_str();
  vor->add_option("--height", vor_args.height, "Grid height in pixels")->capture_default_str();
  vor->add_option("--pad", vor_args.pad, "Padding around the points, per axis span")
      ->capture_default_str();
  vor->add_option("--transform", vor_args.transform,
                  "Move the points first; the self-encoder map is transferred, not retrained");
  add_model_flags(vor, vor_args.model);
  add_common_flags(vor, vor_args.seed, vor_args.config);
  vor->callback([&, vor] {
    apply_config(vor, vor_args.config);
    cmd_voronoi(vor_args);
  });

  FixturesArgs fix_args;
  // The documented rankings are reproducible under this configuration; both
  // defaults remain ordinary flags.
  fix_args.model.lr = 0.5;
  fix_args.seed = 1;
  CLI::App* fix = app.add_subcommand("fixtures", "Run the built-in demonstration cases");
  fix->add_option("--case", fix_args.case_name, "categorical | square")
      ->check(CLI::IsMember({"categorical", "square"}))
      ->capture_default_str();
  add_model_flags(fix, fix_args.model);
  add_common_flags(fix, fix_args.seed, fix_args.config);
  fix->callback([&, fix] {
    apply_config(fix, fix_args.config);
    cmd_fixtures(fix_args);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
