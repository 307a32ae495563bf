#pragma once

// Feed-forward network core: dense layers, activations, forward pass with
// cached intermediates, the identity-prediction BCE loss
//
//   L = -sum_i [ log p_i(x_i) + sum_{j != i} log(1 - p_j(x_i)) ]
//
// and its exact analytic gradient via backpropagation. forward/backward are
// pure; parameter mutation lives in the optimizer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfenc/matrix.hpp"
#include "selfenc/rng.hpp"

namespace selfenc {

enum class Activation { kReLU, kTanh, kSigmoid, kSoftMax, kIdentity };

inline std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kReLU: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftMax: return "softmax";
    case Activation::kIdentity: return "identity";
  }
  throw std::logic_error("activation_name: unknown activation");
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kReLU;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "softmax") return Activation::kSoftMax;
  if (name == "identity") return Activation::kIdentity;
  throw std::invalid_argument("unknown activation name: " + name);
}

struct DenseLayer {
  Matrix weights;             // out_dim x in_dim
  std::vector<double> bias;   // out_dim
  Activation activation = Activation::kIdentity;

  std::size_t in_dim() const { return weights.cols; }
  std::size_t out_dim() const { return weights.rows; }
};

struct Network {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.front().in_dim(); }
  std::size_t output_dim() const { return layers.back().out_dim(); }

  void validate() const {
    if (layers.empty()) throw std::invalid_argument("Network: no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (layers[l].bias.size() != layers[l].out_dim())
        throw std::invalid_argument("Network: layer " + std::to_string(l) +
                                    " bias length does not match weight rows");
      if (l > 0 && layers[l].in_dim() != layers[l - 1].out_dim())
        throw std::invalid_argument("Network: layer " + std::to_string(l) +
                                    " input dim does not chain from previous layer");
      if (layers[l].activation == Activation::kSoftMax && l + 1 != layers.size())
        throw std::invalid_argument("Network: SoftMax is only legal on the output layer");
    }
  }
};

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Row-wise activation of pre-activations. SoftMax subtracts the row max
// before exponentiating.
inline Matrix apply_activation(Activation act, const Matrix& z) {
  Matrix out = z;
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kReLU:
      for (double& v : out.data)
        if (v < 0.0) v = 0.0;
      break;
    case Activation::kTanh:
      for (double& v : out.data) v = std::tanh(v);
      break;
    case Activation::kSigmoid:
      for (double& v : out.data) v = sigmoid(v);
      break;
    case Activation::kSoftMax:
      for (std::size_t i = 0; i < out.rows; ++i) {
        double* row = out.row_ptr(i);
        double mx = row[0];
        for (std::size_t j = 1; j < out.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < out.cols; ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += row[j];
        }
        for (std::size_t j = 0; j < out.cols; ++j) row[j] /= sum;
      }
      break;
  }
  return out;
}

}  // namespace detail

// Per-layer pre- and post-activations of one forward pass; consumed by
// backward. output() is the probability matrix.
struct LayerCache {
  Matrix input;             // batch x d
  std::vector<Matrix> pre;  // z per layer, batch x out_dim
  std::vector<Matrix> post; // activations per layer

  const Matrix& output() const { return post.back(); }
};

inline LayerCache forward(const Network& net, const Matrix& x_batch) {
  net.validate();
  if (x_batch.cols != net.input_dim())
    throw std::invalid_argument("forward: input is " + shape_str(x_batch) +
                                " but network expects " + std::to_string(net.input_dim()) +
                                " columns");
  LayerCache cache;
  cache.input = x_batch;
  const Matrix* current = &cache.input;
  for (const DenseLayer& layer : net.layers) {
    Matrix z = matmul(*current, transpose(layer.weights));
    for (std::size_t i = 0; i < z.rows; ++i) {
      double* row = z.row_ptr(i);
      for (std::size_t j = 0; j < z.cols; ++j) row[j] += layer.bias[j];
    }
    cache.post.push_back(detail::apply_activation(layer.activation, z));
    cache.pre.push_back(std::move(z));
    current = &cache.post.back();
  }
  return cache;
}

// Convenience: forward without keeping the cache.
inline Matrix predict(const Network& net, const Matrix& x_batch) {
  return forward(net, x_batch).output();
}

constexpr double kProbClamp = 1e-12;

// Identity-prediction BCE summed over the batch. Probabilities are clamped to
// [1e-12, 1 - 1e-12] here and only here; forward outputs stay untouched.
inline double bce_loss(const Matrix& probs, const std::vector<std::size_t>& targets) {
  if (probs.rows != targets.size())
    throw std::invalid_argument("bce_loss: " + std::to_string(targets.size()) +
                                " targets for " + std::to_string(probs.rows) + " rows");
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    if (targets[i] >= probs.cols)
      throw std::invalid_argument("bce_loss: target " + std::to_string(targets[i]) +
                                  " out of range for " + std::to_string(probs.cols) +
                                  " outputs (row " + std::to_string(i) + ")");
    const double* row = probs.row_ptr(i);
    for (std::size_t j = 0; j < probs.cols; ++j) {
      const double p = std::min(std::max(row[j], kProbClamp), 1.0 - kProbClamp);
      if (j == targets[i])
        loss -= std::log(p);
      else
        loss -= std::log1p(-p);
    }
  }
  return loss;
}

namespace detail {

// log(1 + e^z) without overflow for large |z|.
inline double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

}  // namespace detail

// The same quantity as bce_loss(activation(z), targets), evaluated in log
// space. Once an output saturates past the clamp, bce_loss flattens to a
// constant even though the logits keep improving; this form stays strictly
// monotone in the logits, so plateau detection in the training loop sees
// real progress. Accepts the pre-activations of a sigmoid or softmax output
// layer.
inline double bce_loss_from_logits(const Matrix& z, const std::vector<std::size_t>& targets,
                                   Activation output_activation) {
  if (z.rows != targets.size())
    throw std::invalid_argument("bce_loss_from_logits: " + std::to_string(targets.size()) +
                                " targets for " + std::to_string(z.rows) + " rows");
  for (std::size_t i = 0; i < z.rows; ++i)
    if (targets[i] >= z.cols)
      throw std::invalid_argument("bce_loss_from_logits: target " + std::to_string(targets[i]) +
                                  " out of range for " + std::to_string(z.cols) +
                                  " outputs (row " + std::to_string(i) + ")");
  double loss = 0.0;
  if (output_activation == Activation::kSigmoid) {
    // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z).
    for (std::size_t i = 0; i < z.rows; ++i) {
      const double* row = z.row_ptr(i);
      for (std::size_t j = 0; j < z.cols; ++j)
        loss += detail::softplus(j == targets[i] ? -row[j] : row[j]);
    }
    return loss;
  }
  if (output_activation == Activation::kSoftMax) {
    // -log p_t = LSE(z) - z_t and -log(1 - p_j) = LSE(z) - LSE(z without j),
    // with LSE the log-sum-exp. Dropping any non-max term keeps the max in
    // the remaining sum, so subtracting its exponential is safe; dropping
    // the max term itself re-anchors the sum at the second-largest logit.
    for (std::size_t i = 0; i < z.rows; ++i) {
      const double* row = z.row_ptr(i);
      std::size_t jmax = 0;
      for (std::size_t j = 1; j < z.cols; ++j)
        if (row[j] > row[jmax]) jmax = j;
      const double mx = row[jmax];
      double sum = 0.0;
      for (std::size_t j = 0; j < z.cols; ++j) sum += std::exp(row[j] - mx);
      const double lse = mx + std::log(sum);
      loss += lse - row[targets[i]];
      for (std::size_t j = 0; j < z.cols; ++j) {
        if (j == targets[i]) continue;
        double lse_without_j;
        if (j == jmax) {
          double mx2 = -std::numeric_limits<double>::infinity();
          for (std::size_t k = 0; k < z.cols; ++k)
            if (k != j) mx2 = std::max(mx2, row[k]);
          double rest = 0.0;
          for (std::size_t k = 0; k < z.cols; ++k)
            if (k != j) rest += std::exp(row[k] - mx2);
          lse_without_j = mx2 + std::log(rest);
        } else {
          lse_without_j = mx + std::log(sum - std::exp(row[j] - mx));
        }
        loss += lse - lse_without_j;
      }
    }
    return loss;
  }
  throw std::invalid_argument("bce_loss_from_logits: output activation must be sigmoid or softmax");
}

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

namespace detail {

// dL/dz of the output layer, one row per sample.
//
// Sigmoid outputs: the per-coordinate BCE against the one-hot target gives
// the classic logistic delta p - e_t.
//
// SoftMax outputs: with g_j = dL/dp_j (that is -1/p_t for the target and
// 1/(1-p_j) elsewhere) and the SoftMax jacobian dp_j/dz_k = p_j(d_jk - p_k),
// contraction gives, with r_j = p_j/(1-p_j) and c = sum_{j!=t} r_j - 1,
//   dL/dz_t = -1 - p_t c,    dL/dz_k = r_k - p_k c  (k != t).
// The 1/(1-p) factors are clamped like the loss so saturated outputs stay
// finite.
inline Matrix output_delta(Activation act, const Matrix& probs,
                           const std::vector<std::size_t>& targets) {
  Matrix delta(probs.rows, probs.cols);
  if (act == Activation::kSigmoid) {
    for (std::size_t i = 0; i < probs.rows; ++i) {
      const double* p = probs.row_ptr(i);
      double* d = delta.row_ptr(i);
      for (std::size_t j = 0; j < probs.cols; ++j) d[j] = p[j];
      d[targets[i]] -= 1.0;
    }
    return delta;
  }
  if (act == Activation::kSoftMax) {
    for (std::size_t i = 0; i < probs.rows; ++i) {
      const double* p = probs.row_ptr(i);
      double* d = delta.row_ptr(i);
      const std::size_t t = targets[i];
      double c = -1.0;
      for (std::size_t j = 0; j < probs.cols; ++j) {
        if (j == t) continue;
        c += p[j] / std::max(1.0 - p[j], kProbClamp);
      }
      for (std::size_t j = 0; j < probs.cols; ++j) {
        if (j == t)
          d[j] = -1.0 - p[j] * c;
        else
          d[j] = p[j] / std::max(1.0 - p[j], kProbClamp) - p[j] * c;
      }
    }
    return delta;
  }
  throw std::invalid_argument("backward: output activation must be sigmoid or softmax");
}

// Derivative of a hidden activation from the cached pre/post values.
inline Matrix activation_derivative(Activation act, const Matrix& pre, const Matrix& post) {
  Matrix d(pre.rows, pre.cols, 1.0);
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kReLU:
      for (std::size_t i = 0; i < pre.data.size(); ++i) d.data[i] = pre.data[i] > 0.0 ? 1.0 : 0.0;
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < post.data.size(); ++i)
        d.data[i] = 1.0 - post.data[i] * post.data[i];
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < post.data.size(); ++i)
        d.data[i] = post.data[i] * (1.0 - post.data[i]);
      break;
    case Activation::kSoftMax:
      throw std::invalid_argument("backward: SoftMax cannot be a hidden activation");
  }
  return d;
}

}  // namespace detail

// Exact analytic gradient of bce_loss with respect to every weight and bias.
// The cache must come from forward() on the same network and batch.
inline Gradients backward(const Network& net, const LayerCache& cache,
                          const std::vector<std::size_t>& targets) {
  const std::size_t L = net.layers.size();
  if (cache.pre.size() != L || cache.post.size() != L)
    throw std::invalid_argument("backward: cache does not match network depth");
  if (cache.input.cols != net.input_dim() || cache.output().cols != net.output_dim())
    throw std::invalid_argument("backward: cache shapes do not match network");
  if (cache.input.rows != targets.size())
    throw std::invalid_argument("backward: " + std::to_string(targets.size()) +
                                " targets for batch of " + std::to_string(cache.input.rows));
  for (std::size_t t : targets)
    if (t >= net.output_dim())
      throw std::invalid_argument("backward: target " + std::to_string(t) + " out of range");

  Gradients grads;
  grads.weights.resize(L);
  grads.bias.resize(L);

  Matrix delta = detail::output_delta(net.layers.back().activation, cache.output(), targets);
  for (std::size_t l = L; l-- > 0;) {
    const Matrix& input_below = (l == 0) ? cache.input : cache.post[l - 1];
    grads.weights[l] = matmul(transpose(delta), input_below);
    grads.bias[l].assign(net.layers[l].out_dim(), 0.0);
    for (std::size_t i = 0; i < delta.rows; ++i) {
      const double* row = delta.row_ptr(i);
      for (std::size_t j = 0; j < delta.cols; ++j) grads.bias[l][j] += row[j];
    }
    if (l > 0) {
      Matrix next = matmul(delta, net.layers[l].weights);
      const Matrix deriv =
          detail::activation_derivative(net.layers[l - 1].activation, cache.pre[l - 1],
                                        cache.post[l - 1]);
      for (std::size_t i = 0; i < next.data.size(); ++i) next.data[i] *= deriv.data[i];
      delta = std::move(next);
    }
  }
  return grads;
}

// Glorot-uniform weights, zero biases. dims chains input -> hidden... -> output;
// activations has one entry per layer. Weights are drawn row-major, layer by
// layer, so a seed pins the whole network.
inline Network init_network(const std::vector<std::size_t>& dims,
                            const std::vector<Activation>& activations, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("init_network: need at least input and output dims");
  if (activations.size() != dims.size() - 1)
    throw std::invalid_argument("init_network: " + std::to_string(activations.size()) +
                                " activations for " + std::to_string(dims.size() - 1) + " layers");
  Network net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l];
    const std::size_t fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weights = Matrix(fan_out, fan_in);
    for (double& w : layer.weights.data) w = rng.uniform(-limit, limit);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = activations[l];
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

}  // namespace selfenc
