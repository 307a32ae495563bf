#pragma once

// Evaluation harness: k-fold cross-validation with per-fold hyperparameter
// search on an inner split of the training portion only, plus a benchmark
// runner that emits a JSON report. Everything is deterministic given the
// top-level seed, except the wall-clock "seconds" fields.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "selfenc/dataset.hpp"
#include "selfenc/matrix.hpp"
#include "selfenc/neighbors.hpp"
#include "selfenc/rng.hpp"
#include "selfenc/self_encoder.hpp"
#include "selfenc/warn.hpp"

namespace selfenc {

inline double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth) {
  if (predictions.empty()) throw std::invalid_argument("accuracy: no predictions");
  if (predictions.size() != truth.size())
    throw std::invalid_argument("accuracy: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(truth.size()) + " labels");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

// One hyperparameter draw. Learning rates are searched log-uniformly over
// [kLrLo, kLrHi]; the output normalization is a coin flip.
struct TrialConfig {
  double lr = 0.1;
  Activation output_normalization = Activation::kSoftMax;
  std::uint64_t seed = 0;
};

inline constexpr double kLrLo = 0.001;
inline constexpr double kLrHi = 2.0;

// A classification method the harness can evaluate: fit on the given
// training rows, predict a label for every query row. Tunable methods get a
// fresh TrialConfig per call; untunable ones receive the defaults.
struct Method {
  std::string name;
  bool tunable = false;
  std::function<std::vector<int>(const Matrix& train_x, const std::vector<int>& train_y,
                                 const Matrix& queries, const TrialConfig& cfg)>
      run;
};

// ---------------------------------------------------------------------------
// Built-in methods.

struct SeMethodOptions {
  std::vector<std::size_t> hidden_dims;       // empty = single affine layer
  std::optional<std::size_t> sample_size;     // train on a subset when set
  std::size_t k = 5;                          // votes among the top-k ranked anchors
  TrainSchedule schedule;                     // initial_lr is overridden per trial
};

inline Method se_method(std::string name, SeMethodOptions opts = {}) {
  Method m;
  m.name = std::move(name);
  m.tunable = true;
  m.run = [opts](const Matrix& train_x, const std::vector<int>& train_y, const Matrix& queries,
                 const TrialConfig& cfg) {
    SelfEncoderConfig sec;
    sec.hidden_dims = opts.hidden_dims;
    sec.output_normalization = cfg.output_normalization;
    sec.schedule = opts.schedule;
    sec.schedule.initial_lr = cfg.lr;
    sec.sample_size = opts.sample_size;
    sec.seed = cfg.seed;
    const SelfEncoderModel model = fit(train_x, sec);
    const std::size_t k = std::min(opts.k, model.anchor_indices.size());
    std::vector<int> preds;
    preds.reserve(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i)
      preds.push_back(se_knn_predict(model, train_y, queries.row_copy(i), k));
    return preds;
  };
  return m;
}

// Untunable self-encoder baseline: trains with the options' schedule and the
// given output normalization exactly as written, ignoring the per-trial draw
// the way any untunable method does. Useful when two datasets must be
// compared under an identical, fully pinned recipe.
inline Method se_fixed_method(std::string name, SeMethodOptions opts, Activation normalization) {
  Method m;
  m.name = std::move(name);
  m.tunable = false;
  m.run = [opts, normalization](const Matrix& train_x, const std::vector<int>& train_y,
                                const Matrix& queries, const TrialConfig& cfg) {
    SelfEncoderConfig sec;
    sec.hidden_dims = opts.hidden_dims;
    sec.output_normalization = normalization;
    sec.schedule = opts.schedule;
    sec.sample_size = opts.sample_size;
    sec.seed = cfg.seed;
    const SelfEncoderModel model = fit(train_x, sec);
    const std::size_t k = std::min(opts.k, model.anchor_indices.size());
    std::vector<int> preds;
    preds.reserve(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i)
      preds.push_back(se_knn_predict(model, train_y, queries.row_copy(i), k));
    return preds;
  };
  return m;
}

inline Method euclidean_knn_method(std::size_t k = 5, std::string name = "knn") {
  Method m;
  m.name = std::move(name);
  m.tunable = false;
  m.run = [k](const Matrix& train_x, const std::vector<int>& train_y, const Matrix& queries,
              const TrialConfig&) {
    const std::size_t k_eff = std::min(k, train_x.rows);
    std::vector<int> preds;
    preds.reserve(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i)
      preds.push_back(euclidean_knn_predict(train_x, train_y, queries.row_copy(i), k_eff));
    return preds;
  };
  return m;
}

// Per-column min-max scaling fitted on the training rows only and applied to
// both sides; constant columns collapse to 0. One-hot columns holding both
// values pass through unchanged.
inline Method euclidean_knn_normalized_method(std::size_t k = 5,
                                              std::string name = "knn-normalized") {
  Method m;
  m.name = std::move(name);
  m.tunable = false;
  m.run = [k](const Matrix& train_x, const std::vector<int>& train_y, const Matrix& queries,
              const TrialConfig&) {
    std::vector<double> lo(train_x.cols), hi(train_x.cols);
    for (std::size_t j = 0; j < train_x.cols; ++j) {
      lo[j] = hi[j] = train_x(0, j);
      for (std::size_t i = 1; i < train_x.rows; ++i) {
        lo[j] = std::min(lo[j], train_x(i, j));
        hi[j] = std::max(hi[j], train_x(i, j));
      }
    }
    const auto scale = [&](const Matrix& src) {
      Matrix dst(src.rows, src.cols);
      for (std::size_t i = 0; i < src.rows; ++i)
        for (std::size_t j = 0; j < src.cols; ++j)
          dst(i, j) = hi[j] > lo[j] ? (src(i, j) - lo[j]) / (hi[j] - lo[j]) : 0.0;
      return dst;
    };
    const Matrix train_scaled = scale(train_x);
    const Matrix queries_scaled = scale(queries);
    const std::size_t k_eff = std::min(k, train_scaled.rows);
    std::vector<int> preds;
    preds.reserve(queries.rows);
    for (std::size_t i = 0; i < queries.rows; ++i)
      preds.push_back(
          euclidean_knn_predict(train_scaled, train_y, queries_scaled.row_copy(i), k_eff));
    return preds;
  };
  return m;
}

// ---------------------------------------------------------------------------
// Cross-validation.

struct CVReport {
  std::string dataset;
  std::string method;
  std::size_t folds = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> fold_accuracies;
  std::vector<TrialConfig> chosen;  // per fold; defaults for untunable methods
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1)
  double seconds = 0.0;
};

namespace detail {

inline void finish_stats(CVReport& r) {
  double sum = 0.0;
  for (double a : r.fold_accuracies) sum += a;
  r.mean = sum / static_cast<double>(r.fold_accuracies.size());
  if (r.fold_accuracies.size() > 1) {
    double ss = 0.0;
    for (double a : r.fold_accuracies) ss += (a - r.mean) * (a - r.mean);
    r.stddev = std::sqrt(ss / static_cast<double>(r.fold_accuracies.size() - 1));
  }
}

}  // namespace detail

// Stratified K-fold cross-validation. For tunable methods each fold runs
// `trials` random hyperparameter draws, scored on a held-out fifth of that
// fold's training portion; the best draw (ties to the earliest) is refit on
// the full training portion and scored once on the test fold. Test rows are
// never passed to the method during selection.
inline CVReport cross_validate(const Dataset& d, const Method& method, std::size_t folds,
                               std::size_t trials, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  CVReport report;
  report.dataset = d.name;
  report.method = method.name;
  report.folds = folds;
  report.trials = method.tunable ? trials : 0;
  report.seed = seed;

  Rng master(seed);
  Rng fold_maker = master.child(0);
  const FoldSplit split = stratified_kfold(d, folds, fold_maker);

  for (std::size_t f = 0; f < folds; ++f) {
    Rng r = master.child(1 + f);
    TrialConfig best;
    best.seed = r.next_u64();  // refit seed, drawn first so tuning can't shift it

    const std::vector<std::size_t> train_rows = split.train_indices(f, d.size());
    const std::vector<std::size_t>& test_rows = split.test_folds[f];
    const Dataset train = select_rows(d, train_rows);
    const Dataset test = select_rows(d, test_rows);

    if (method.tunable && trials > 0) {
      std::vector<std::size_t> perm(train.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      r.shuffle(perm);
      const std::size_t n_val = std::max<std::size_t>(1, train.size() / 5);
      if (n_val >= train.size()) {
        warn("cross_validate: training portion too small to tune; using defaults");
      } else {
        const std::vector<std::size_t> val_rows(perm.begin(),
                                                perm.begin() + static_cast<long>(n_val));
        const std::vector<std::size_t> fit_rows(perm.begin() + static_cast<long>(n_val),
                                                perm.end());
        const Dataset inner_fit = select_rows(train, fit_rows);
        const Dataset inner_val = select_rows(train, val_rows);
        double best_acc = -1.0;
        TrialConfig best_trial;
        for (std::size_t t = 0; t < trials; ++t) {
          TrialConfig cfg;
          cfg.lr = std::exp(r.uniform(std::log(kLrLo), std::log(kLrHi)));
          cfg.output_normalization = r.coin() ? Activation::kSoftMax : Activation::kSigmoid;
          cfg.seed = r.next_u64();
          const std::vector<int> preds =
              method.run(inner_fit.features, inner_fit.labels, inner_val.features, cfg);
          const double acc = accuracy(preds, inner_val.labels);
          if (acc > best_acc) {
            best_acc = acc;
            best_trial = cfg;
          }
        }
        best.lr = best_trial.lr;
        best.output_normalization = best_trial.output_normalization;
      }
    }

    const std::vector<int> preds = method.run(train.features, train.labels, test.features, best);
    report.fold_accuracies.push_back(accuracy(preds, test.labels));
    report.chosen.push_back(best);
  }

  detail::finish_stats(report);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// ---------------------------------------------------------------------------
// Benchmark runner and JSON report.

struct DatasetSource {
  std::string csv_path;
  std::string schema_path;
};

inline nlohmann::ordered_json report_to_json(const CVReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["folds"] = r.fold_accuracies;
  j["mean"] = r.mean;
  j["std"] = r.stddev;
  j["seed"] = r.seed;
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  for (const TrialConfig& c : r.chosen) {
    nlohmann::ordered_json jc;
    jc["lr"] = c.lr;
    jc["normalization"] = activation_name(c.output_normalization);
    jc["seed"] = c.seed;
    configs.push_back(jc);
  }
  j["config"] = configs;
  j["seconds"] = r.seconds;
  return j;
}

inline nlohmann::ordered_json run_benchmark(const std::vector<Dataset>& datasets,
                                            const std::vector<Method>& methods,
                                            std::size_t folds, std::size_t trials,
                                            std::uint64_t seed) {
  nlohmann::ordered_json report;
  report["seed"] = seed;
  report["folds"] = folds;
  report["trials"] = trials;
  report["results"] = nlohmann::ordered_json::array();
  for (const Dataset& d : datasets) {
    nlohmann::ordered_json entry;
    entry["dataset"] = d.name;
    entry["samples"] = d.size();
    entry["features"] = d.dim();
    entry["classes"] = d.class_count();
    entry["methods"] = nlohmann::ordered_json::array();
    for (const Method& m : methods)
      entry["methods"].push_back(report_to_json(cross_validate(d, m, folds, trials, seed)));
    report["results"].push_back(entry);
  }
  return report;
}

// File-based variant: a dataset that fails to load contributes an error
// entry naming the file, and the remaining datasets still run.
inline nlohmann::ordered_json run_benchmark(const std::vector<DatasetSource>& sources,
                                            const std::vector<Method>& methods,
                                            std::size_t folds, std::size_t trials,
                                            std::uint64_t seed) {
  nlohmann::ordered_json report;
  report["seed"] = seed;
  report["folds"] = folds;
  report["trials"] = trials;
  report["results"] = nlohmann::ordered_json::array();
  for (const DatasetSource& src : sources) {
    nlohmann::ordered_json entry;
    try {
      const Dataset d = load_csv(src.csv_path, load_schema(src.schema_path));
      entry["dataset"] = d.name;
      entry["samples"] = d.size();
      entry["features"] = d.dim();
      entry["classes"] = d.class_count();
      entry["methods"] = nlohmann::ordered_json::array();
      for (const Method& m : methods)
        entry["methods"].push_back(report_to_json(cross_validate(d, m, folds, trials, seed)));
    } catch (const std::exception& e) {
      entry.clear();
      entry["dataset"] = src.csv_path;
      entry["error"] = e.what();
      warn("run_benchmark: skipping " + src.csv_path + ": " + e.what());
    }
    report["results"].push_back(entry);
  }
  return report;
}

inline void write_report(const nlohmann::ordered_json& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_report: cannot open " + path);
  os << report.dump(2) << '\n';
  if (!os) throw std::runtime_error("write_report: failed writing " + path);
}

}  // namespace selfenc
