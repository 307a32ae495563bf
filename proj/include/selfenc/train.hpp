#pragma once

// Adam with per-epoch multiplicative learning-rate decay and plateau early
// stopping. Training is full batch: every target dataset is small enough,
// and it removes mini-batch ordering as a reproducibility hazard.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfenc/network.hpp"

namespace selfenc {

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AdamState {
  std::vector<Matrix> m_weights, v_weights;
  std::vector<std::vector<double>> m_bias, v_bias;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const Network& net) {
    AdamState s;
    for (const DenseLayer& layer : net.layers) {
      s.m_weights.emplace_back(layer.out_dim(), layer.in_dim());
      s.v_weights.emplace_back(layer.out_dim(), layer.in_dim());
      s.m_bias.emplace_back(layer.out_dim(), 0.0);
      s.v_bias.emplace_back(layer.out_dim(), 0.0);
    }
    return s;
  }
};

namespace detail {

inline void adam_update(double lr, double b1, double b2, double eps, double b1t, double b2t,
                        const std::vector<double>& grad, std::vector<double>& m,
                        std::vector<double>& v, std::vector<double>& param) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double m_hat = m[i] / (1.0 - b1t);
    const double v_hat = v[i] / (1.0 - b2t);
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace detail

// One bias-corrected Adam update over every parameter; increments the step.
inline void adam_step(Network& net, const Gradients& grads, AdamState& state, double lr) {
  if (grads.weights.size() != net.layers.size())
    throw std::invalid_argument("adam_step: gradient layer count does not match network");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (grads.weights[l].rows != net.layers[l].out_dim() ||
        grads.weights[l].cols != net.layers[l].in_dim() ||
        grads.bias[l].size() != net.layers[l].out_dim())
      throw std::invalid_argument("adam_step: gradient shape mismatch at layer " +
                                  std::to_string(l));
  }
  state.step += 1;
  const double b1t = std::pow(state.beta1, static_cast<double>(state.step));
  const double b2t = std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    detail::adam_update(lr, state.beta1, state.beta2, state.epsilon, b1t, b2t,
                        grads.weights[l].data, state.m_weights[l].data, state.v_weights[l].data,
                        net.layers[l].weights.data);
    detail::adam_update(lr, state.beta1, state.beta2, state.epsilon, b1t, b2t, grads.bias[l],
                        state.m_bias[l], state.v_bias[l], net.layers[l].bias);
  }
}

struct TrainSchedule {
  double initial_lr = 0.1;
  double lr_decay = 0.995;       // multiplied in after every epoch
  std::size_t max_epochs = 2000;
  std::size_t patience = 50;     // epochs without improvement before stopping
  double min_improvement = 1e-5;

  void validate() const {
    if (!(lr_decay > 0.0 && lr_decay <= 1.0))
      throw std::invalid_argument("TrainSchedule: lr_decay must be in (0, 1]");
    if (patience < 1) throw std::invalid_argument("TrainSchedule: patience must be >= 1");
  }
};

struct TrainResult {
  Network network;             // parameters of the best recorded epoch
  std::vector<double> losses;  // full-batch loss entering each epoch
  std::vector<double> lrs;     // learning rate used by each epoch
  bool stopped_early = false;
};

// Full-batch training loop. losses[e] is measured on the parameters entering
// epoch e; the returned network is the snapshot with the lowest recorded
// loss, so its loss never exceeds the first epoch's. An epoch counts as an
// improvement when it beats the best loss so far by min_improvement; after
// `patience` consecutive non-improvements the loop stops early.
inline TrainResult train(Network net, const Matrix& x, const std::vector<std::size_t>& targets,
                         const TrainSchedule& schedule) {
  schedule.validate();
  if (x.rows != targets.size())
    throw std::invalid_argument("train: " + std::to_string(targets.size()) + " targets for " +
                                std::to_string(x.rows) + " samples");
  TrainResult result;
  AdamState state = AdamState::for_network(net);
  double lr = schedule.initial_lr;
  double best_loss = std::numeric_limits<double>::infinity();
  Network best_net = net;
  std::size_t epochs_since_improvement = 0;

  for (std::size_t epoch = 0; epoch < schedule.max_epochs; ++epoch) {
    const LayerCache cache = forward(net, x);
    // Log-space evaluation: the clamped probability form goes flat once
    // outputs saturate, which would trip the plateau stop while the logits
    // are still moving (e.g. when one raw feature dwarfs the others).
    const double loss =
        bce_loss_from_logits(cache.pre.back(), targets, net.layers.back().activation);
    if (!std::isfinite(loss))
      throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch));
    result.losses.push_back(loss);
    result.lrs.push_back(lr);

    if (loss < best_loss) {
      if (loss < best_loss - schedule.min_improvement)
        epochs_since_improvement = 0;
      else
        ++epochs_since_improvement;
      best_loss = loss;
      best_net = net;
    } else {
      ++epochs_since_improvement;
    }
    if (epochs_since_improvement >= schedule.patience) {
      result.stopped_early = true;
      break;
    }

    const Gradients grads = backward(net, cache, targets);
    adam_step(net, grads, state, lr);
    lr *= schedule.lr_decay;
  }

  result.network = std::move(best_net);
  return result;
}

}  // namespace selfenc
