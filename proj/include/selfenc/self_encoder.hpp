#pragma once

// The self-encoder: a network whose output coordinate j predicts "this input
// is training sample j". Training it to self-identify induces a similarity:
// a query is close to the anchors whose identity probabilities are largest.
//
// In sampling mode only a random subset of s anchors is identified, cutting
// the per-epoch cost of the output layer from O(n^2) to O(s^2) and query
// ranking from O(n) to O(s).

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "selfenc/matrix.hpp"
#include "selfenc/network.hpp"
#include "selfenc/rng.hpp"
#include "selfenc/train.hpp"
#include "selfenc/warn.hpp"

namespace selfenc {

struct SelfEncoderConfig {
  std::vector<std::size_t> hidden_dims;  // empty = no hidden layer
  Activation hidden_activation = Activation::kReLU;
  Activation output_normalization = Activation::kSoftMax;  // or kSigmoid
  TrainSchedule schedule;
  std::optional<std::size_t> sample_size;  // sampling mode when set
  std::uint64_t seed = 0;
};

// x -> M x + v with M invertible.
struct AffineTransform {
  Matrix m;
  std::vector<double> v;

  std::vector<double> apply(const std::vector<double>& x) const { return matvec(m, x, v); }

  static AffineTransform identity(std::size_t d) {
    return {Matrix::identity(d), std::vector<double>(d, 0.0)};
  }
};

// A fitted model is self-contained: it keeps the anchor rows it identifies,
// so ranking and affine transfer need no access to the training set.
// Immutable after fit; safe to share across concurrent query tasks.
struct SelfEncoderModel {
  Network network;
  std::vector<std::size_t> anchor_indices;  // training-set indices, ascending
  Matrix anchor_features;                   // copies of those rows
  SelfEncoderConfig config;
};

struct RankedNeighbor {
  std::size_t anchor_index;  // index into the original training set
  double probability;
};

// Every anchor exactly once, probabilities non-increasing, ties broken by
// ascending anchor index.
using NeighborRanking = std::vector<RankedNeighbor>;

// Uniform without replacement; indices ascending. The anchors of sampling
// mode ("visible" samples).
inline std::pair<std::vector<std::size_t>, Matrix> sample_subset(const Matrix& x_train,
                                                                 std::size_t s, Rng& rng) {
  if (s < 1) throw std::invalid_argument("sample_subset: s must be at least 1");
  const std::vector<std::size_t> indices = rng.choice_without_replacement(x_train.rows, s);
  Matrix features(s, x_train.cols);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < x_train.cols; ++j) features(i, j) = x_train(indices[i], j);
  return {indices, features};
}

namespace detail {

// Reports duplicated anchor rows. Identical points cannot be linearly
// separated from one another, so the loss has no Dirac optimum for them and
// self-identification checks must exempt such pairs.
inline void warn_duplicate_anchors(const Matrix& anchors) {
  std::vector<std::size_t> order(anchors.rows);
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(anchors.row_ptr(a), anchors.row_ptr(a) + anchors.cols,
                                        anchors.row_ptr(b), anchors.row_ptr(b) + anchors.cols);
  };
  std::sort(order.begin(), order.end(), row_less);
  std::size_t duplicates = 0;
  std::size_t first_a = 0, first_b = 0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!row_less(order[i - 1], order[i]) && !row_less(order[i], order[i - 1])) {
      if (duplicates == 0) {
        first_a = std::min(order[i - 1], order[i]);
        first_b = std::max(order[i - 1], order[i]);
      }
      ++duplicates;
    }
  }
  if (duplicates > 0)
    warn("fit: " + std::to_string(duplicates) + " duplicated anchor row(s), e.g. rows " +
         std::to_string(first_a) + " and " + std::to_string(first_b) +
         "; duplicates cannot be told apart and are exempt from self-identification");
}

}  // namespace detail

// Trains a self-encoder on x_train. Anchors are all rows, or a uniform
// subset of config.sample_size rows in sampling mode (clamped to the number
// of rows, with a notice). Deterministic given config.seed: the anchor draw
// happens first, then the weight initialization.
inline SelfEncoderModel fit(const Matrix& x_train, const SelfEncoderConfig& config) {
  if (x_train.rows < 2)
    throw std::invalid_argument("fit: need at least 2 training rows, got " +
                                std::to_string(x_train.rows));
  Rng rng(config.seed);

  SelfEncoderModel model;
  model.config = config;
  if (config.sample_size.has_value()) {
    std::size_t s = *config.sample_size;
    if (s < 1) throw std::invalid_argument("fit: sample_size must be at least 1");
    if (s > x_train.rows) {
      warn("fit: sample_size " + std::to_string(s) + " clamped to the " +
           std::to_string(x_train.rows) + " available rows");
      s = x_train.rows;
    }
    auto [indices, features] = sample_subset(x_train, s, rng);
    model.anchor_indices = std::move(indices);
    model.anchor_features = std::move(features);
  } else {
    model.anchor_indices.resize(x_train.rows);
    std::iota(model.anchor_indices.begin(), model.anchor_indices.end(), 0);
    model.anchor_features = x_train;
  }
  detail::warn_duplicate_anchors(model.anchor_features);

  std::vector<std::size_t> dims;
  dims.push_back(x_train.cols);
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(model.anchor_indices.size());
  std::vector<Activation> activations(config.hidden_dims.size(), config.hidden_activation);
  activations.push_back(config.output_normalization);

  Network net = init_network(dims, activations, rng);
  std::vector<std::size_t> targets(model.anchor_indices.size());
  std::iota(targets.begin(), targets.end(), 0);
  model.network = train(std::move(net), model.anchor_features, targets, config.schedule).network;
  return model;
}

// Identity probabilities for one query, sorted descending; ties broken by
// ascending anchor index. Pure.
inline NeighborRanking rank_neighbors(const SelfEncoderModel& model,
                                      const std::vector<double>& x) {
  if (x.size() != model.network.input_dim())
    throw std::invalid_argument("rank_neighbors: query has " + std::to_string(x.size()) +
                                " features, model expects " +
                                std::to_string(model.network.input_dim()));
  Matrix batch(1, x.size());
  for (std::size_t j = 0; j < x.size(); ++j) batch(0, j) = x[j];
  const Matrix probs = predict(model.network, batch);
  NeighborRanking ranking(probs.cols);
  for (std::size_t j = 0; j < probs.cols; ++j)
    ranking[j] = {model.anchor_indices[j], probs(0, j)};
  // anchor_indices ascend, so a stable sort keeps the documented tie order.
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const RankedNeighbor& a, const RankedNeighbor& b) {
                     return a.probability > b.probability;
                   });
  return ranking;
}

// Constructive invariance transfer: given the affine map x -> Mx + v, returns
// the encoder with first-layer parameters
//   W~ = W M^-1,   b~ = b - W M^-1 v,
// all other layers copied, and anchors replaced by their images. The result
// satisfies transferred(Mx + v) = original(x) up to roundoff.
inline SelfEncoderModel transfer_weights(const SelfEncoderModel& model,
                                         const AffineTransform& t) {
  const std::size_t d = model.network.input_dim();
  if (t.m.rows != d || t.m.cols != d || t.v.size() != d)
    throw std::invalid_argument("transfer_weights: transform is " + shape_str(t.m) + "+" +
                                std::to_string(t.v.size()) + ", model expects dimension " +
                                std::to_string(d));
  const Matrix m_inv = invert(t.m);

  SelfEncoderModel out = model;
  DenseLayer& first = out.network.layers.front();
  first.weights = matmul(model.network.layers.front().weights, m_inv);
  const std::vector<double> correction = matvec(first.weights, t.v);
  for (std::size_t i = 0; i < first.bias.size(); ++i) first.bias[i] -= correction[i];

  for (std::size_t r = 0; r < out.anchor_features.rows; ++r) {
    const std::vector<double> image = t.apply(model.anchor_features.row_copy(r));
    for (std::size_t j = 0; j < d; ++j) out.anchor_features(r, j) = image[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model files: versioned line-oriented text. Doubles are written with
// std::to_chars shortest form, which round-trips bit-exactly.

namespace detail {

inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("model file: bad number '" + s + "'");
  return v;
}

inline void write_row(std::ostream& os, const double* row, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) os << ' ';
    os << fmt_double(row[j]);
  }
  os << '\n';
}

}  // namespace detail

constexpr const char* kModelMagic = "selfenc-model v1";

inline void save_model(const SelfEncoderModel& model, std::ostream& os) {
  os << kModelMagic << '\n';
  os << "output_normalization " << activation_name(model.config.output_normalization) << '\n';
  os << "hidden_activation " << activation_name(model.config.hidden_activation) << '\n';
  os << "hidden_dims " << model.config.hidden_dims.size();
  for (std::size_t h : model.config.hidden_dims) os << ' ' << h;
  os << '\n';
  const TrainSchedule& s = model.config.schedule;
  os << "schedule " << detail::fmt_double(s.initial_lr) << ' ' << detail::fmt_double(s.lr_decay)
     << ' ' << s.max_epochs << ' ' << s.patience << ' ' << detail::fmt_double(s.min_improvement)
     << '\n';
  if (model.config.sample_size.has_value())
    os << "sample_size " << *model.config.sample_size << '\n';
  else
    os << "sample_size none\n";
  os << "seed " << model.config.seed << '\n';

  os << "anchors " << model.anchor_features.rows << ' ' << model.anchor_features.cols << '\n';
  for (std::size_t i = 0; i < model.anchor_indices.size(); ++i)
    os << (i > 0 ? " " : "") << model.anchor_indices[i];
  os << '\n';
  for (std::size_t i = 0; i < model.anchor_features.rows; ++i)
    detail::write_row(os, model.anchor_features.row_ptr(i), model.anchor_features.cols);

  os << "layers " << model.network.layers.size() << '\n';
  for (const DenseLayer& layer : model.network.layers) {
    os << "layer " << layer.out_dim() << ' ' << layer.in_dim() << ' '
       << activation_name(layer.activation) << '\n';
    for (std::size_t i = 0; i < layer.out_dim(); ++i)
      detail::write_row(os, layer.weights.row_ptr(i), layer.in_dim());
    detail::write_row(os, layer.bias.data(), layer.bias.size());
  }
}

inline void save_model(const SelfEncoderModel& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_model: cannot open " + path + " for writing");
  save_model(model, os);
  if (!os) throw std::runtime_error("save_model: write to " + path + " failed");
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream iss(line);
  std::vector<std::string> out;
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

inline std::string expect_line(std::istream& is, const std::string& what) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("model file: missing " + what);
  return line;
}

inline std::vector<std::string> expect_fields(std::istream& is, const std::string& key,
                                              std::size_t min_fields) {
  const std::string line = expect_line(is, key);
  const std::vector<std::string> fields = split_ws(line);
  if (fields.empty() || fields[0] != key || fields.size() < min_fields + 1)
    throw std::runtime_error("model file: expected '" + key + " ...', got '" + line + "'");
  return fields;
}

inline std::vector<double> expect_row(std::istream& is, std::size_t n, const std::string& what) {
  const std::vector<std::string> fields = split_ws(expect_line(is, what));
  if (fields.size() != n)
    throw std::runtime_error("model file: " + what + " has " + std::to_string(fields.size()) +
                             " values, expected " + std::to_string(n));
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = parse_double(fields[j]);
  return out;
}

}  // namespace detail

inline SelfEncoderModel load_model(std::istream& is) {
  using detail::expect_fields;
  using detail::expect_line;
  using detail::expect_row;

  if (expect_line(is, "header") != kModelMagic)
    throw std::runtime_error("model file: bad header (expected '" + std::string(kModelMagic) +
                             "')");
  SelfEncoderModel model;
  model.config.output_normalization =
      activation_from_name(expect_fields(is, "output_normalization", 1)[1]);
  model.config.hidden_activation =
      activation_from_name(expect_fields(is, "hidden_activation", 1)[1]);

  const auto hidden = expect_fields(is, "hidden_dims", 1);
  const std::size_t n_hidden = std::stoul(hidden[1]);
  if (hidden.size() != n_hidden + 2) throw std::runtime_error("model file: hidden_dims count");
  for (std::size_t i = 0; i < n_hidden; ++i)
    model.config.hidden_dims.push_back(std::stoul(hidden[2 + i]));

  const auto sched = expect_fields(is, "schedule", 5);
  model.config.schedule.initial_lr = detail::parse_double(sched[1]);
  model.config.schedule.lr_decay = detail::parse_double(sched[2]);
  model.config.schedule.max_epochs = std::stoul(sched[3]);
  model.config.schedule.patience = std::stoul(sched[4]);
  model.config.schedule.min_improvement = detail::parse_double(sched[5]);

  const auto sample = expect_fields(is, "sample_size", 1);
  if (sample[1] != "none") model.config.sample_size = std::stoul(sample[1]);
  model.config.seed = std::stoull(expect_fields(is, "seed", 1)[1]);

  const auto anchors = expect_fields(is, "anchors", 2);
  const std::size_t n_anchors = std::stoul(anchors[1]);
  const std::size_t dim = std::stoul(anchors[2]);
  {
    const auto fields = detail::split_ws(expect_line(is, "anchor indices"));
    if (fields.size() != n_anchors) throw std::runtime_error("model file: anchor index count");
    for (const std::string& f : fields) model.anchor_indices.push_back(std::stoul(f));
  }
  model.anchor_features = Matrix(n_anchors, dim);
  for (std::size_t i = 0; i < n_anchors; ++i) {
    const std::vector<double> row = expect_row(is, dim, "anchor row " + std::to_string(i));
    std::copy(row.begin(), row.end(), model.anchor_features.row_ptr(i));
  }

  const std::size_t n_layers = std::stoul(expect_fields(is, "layers", 1)[1]);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto fields = expect_fields(is, "layer", 3);
    DenseLayer layer;
    const std::size_t out_dim = std::stoul(fields[1]);
    const std::size_t in_dim = std::stoul(fields[2]);
    layer.activation = activation_from_name(fields[3]);
    layer.weights = Matrix(out_dim, in_dim);
    for (std::size_t i = 0; i < out_dim; ++i) {
      const std::vector<double> row = expect_row(is, in_dim, "weight row " + std::to_string(i));
      std::copy(row.begin(), row.end(), layer.weights.row_ptr(i));
    }
    layer.bias = expect_row(is, out_dim, "bias of layer " + std::to_string(l));
    model.network.layers.push_back(std::move(layer));
  }
  model.network.validate();
  if (model.network.output_dim() != n_anchors)
    throw std::runtime_error("model file: output dim does not match anchor count");
  return model;
}

inline SelfEncoderModel load_model(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_model: cannot open " + path);
  return load_model(is);
}

}  // namespace selfenc
