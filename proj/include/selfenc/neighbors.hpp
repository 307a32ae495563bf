#pragma once

// Nearest-neighbor classifiers: SE-kNN votes over the self-encoder's top-k
// ranked anchors; the Euclidean baseline votes over the k smallest distances.
// Both share the same vote rule. All functions are pure.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfenc/matrix.hpp"
#include "selfenc/self_encoder.hpp"

namespace selfenc {

namespace detail {

// Majority vote over k (label, affinity) pairs, affinity higher-is-closer.
// Ties on the vote count fall to the larger summed affinity within the tied
// classes, then to the smaller class id.
inline int vote(const std::vector<std::pair<int, double>>& neighbors) {
  int max_label = 0;
  for (const auto& [label, affinity] : neighbors) max_label = std::max(max_label, label);
  std::vector<std::size_t> count(static_cast<std::size_t>(max_label) + 1, 0);
  std::vector<double> affinity_sum(static_cast<std::size_t>(max_label) + 1, 0.0);
  for (const auto& [label, affinity] : neighbors) {
    if (label < 0) throw std::invalid_argument("vote: negative class id");
    count[label] += 1;
    affinity_sum[label] += affinity;
  }
  int best = -1;
  for (int c = 0; c <= max_label; ++c) {
    if (count[c] == 0) continue;
    if (best < 0 || count[c] > count[best] ||
        (count[c] == count[best] && affinity_sum[c] > affinity_sum[best]))
      best = c;
  }
  return best;
}

}  // namespace detail

// Majority vote over the k most probable anchors of the model. train_labels
// are class ids for the *original* training set the model was fitted on; the
// anchor indices select into it.
inline int se_knn_predict(const SelfEncoderModel& model, const std::vector<int>& train_labels,
                          const std::vector<double>& x, std::size_t k) {
  const std::size_t n_anchors = model.anchor_indices.size();
  if (k < 1 || k > n_anchors)
    throw std::invalid_argument("se_knn_predict: k=" + std::to_string(k) +
                                " out of range for " + std::to_string(n_anchors) + " anchors");
  for (std::size_t idx : model.anchor_indices)
    if (idx >= train_labels.size())
      throw std::invalid_argument("se_knn_predict: anchor index " + std::to_string(idx) +
                                  " has no label");
  const NeighborRanking ranking = rank_neighbors(model, x);
  std::vector<std::pair<int, double>> top;
  top.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    top.emplace_back(train_labels[ranking[i].anchor_index], ranking[i].probability);
  return detail::vote(top);
}

// All training indices attaining the minimum squared Euclidean distance to x,
// ascending. Exposes exact tie sets.
inline std::vector<std::size_t> nearest_set(const Matrix& x_train, const std::vector<double>& x) {
  if (x.size() != x_train.cols)
    throw std::invalid_argument("nearest_set: query has " + std::to_string(x.size()) +
                                " features, training data has " + std::to_string(x_train.cols));
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> result;
  for (std::size_t i = 0; i < x_train.rows; ++i) {
    const double* row = x_train.row_ptr(i);
    double dist = 0.0;
    for (std::size_t j = 0; j < x_train.cols; ++j) {
      const double diff = row[j] - x[j];
      dist += diff * diff;
    }
    if (dist < best) {
      best = dist;
      result.clear();
    }
    if (dist == best) result.push_back(i);
  }
  return result;
}

// Euclidean k-NN baseline: neighbors by ascending squared distance, distance
// ties by ascending index, then the same vote rule as se_knn_predict (with
// negated squared distance as the affinity).
inline int euclidean_knn_predict(const Matrix& x_train, const std::vector<int>& train_labels,
                                 const std::vector<double>& x, std::size_t k) {
  if (train_labels.size() != x_train.rows)
    throw std::invalid_argument("euclidean_knn_predict: " + std::to_string(train_labels.size()) +
                                " labels for " + std::to_string(x_train.rows) + " rows");
  if (k < 1 || k > x_train.rows)
    throw std::invalid_argument("euclidean_knn_predict: k=" + std::to_string(k) +
                                " out of range for " + std::to_string(x_train.rows) + " rows");
  if (x.size() != x_train.cols)
    throw std::invalid_argument("euclidean_knn_predict: query has " + std::to_string(x.size()) +
                                " features, training data has " + std::to_string(x_train.cols));
  std::vector<std::pair<double, std::size_t>> dist(x_train.rows);
  for (std::size_t i = 0; i < x_train.rows; ++i) {
    const double* row = x_train.row_ptr(i);
    double d = 0.0;
    for (std::size_t j = 0; j < x_train.cols; ++j) {
      const double diff = row[j] - x[j];
      d += diff * diff;
    }
    dist[i] = {d, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  std::vector<std::pair<int, double>> top;
  top.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    top.emplace_back(train_labels[dist[i].second], -dist[i].first);
  return detail::vote(top);
}

}  // namespace selfenc
