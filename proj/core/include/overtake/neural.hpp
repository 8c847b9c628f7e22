#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "overtake/rng.hpp"

namespace overtake {

enum class Activation { kIdentity, kRelu };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.weight == b.weight && a.bias == b.bias;
  }
};

// Dense network: rectifier on hidden layers, `output_activation` on the last.
// Gradients use the same type.
struct Mlp {
  std::vector<DenseLayer> layers;
  Activation output_activation = Activation::kIdentity;

  int input_dim() const { return static_cast<int>(layers.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().weight.rows()); }
  std::vector<int> dims() const;
  std::size_t parameter_count() const;

  friend bool operator==(const Mlp&, const Mlp&) = default;
};

// Uniform init in +-sqrt(6 / (fan_in + fan_out)), zero biases.
Mlp make_mlp(std::span<const int> dims, Activation output_activation, Rng& rng);
Mlp zeros_like(const Mlp& net);

// Per-layer inputs and pre-activations, columns are samples.
struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> pre;
};

// x is input_dim x batch. Throws ShapeError on a dimension mismatch.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, MlpCache* cache = nullptr);
std::vector<double> forward(const Mlp& net, std::span<const double> x);

// Writes dLoss/dParams into `grads` (overwritten) and returns dLoss/dInput.
// Throws StateError when the cache does not belong to a forward pass of `net`.
Eigen::MatrixXd backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& upstream,
                         Mlp& grads);

// params -= lr * grads. Throws ShapeError on mismatched shapes, InvalidInputError on lr <= 0.
void sgd_step(Mlp& params, const Mlp& grads, double lr);

void for_each_parameter(Mlp& net, const std::function<void(double&)>& fn);
void for_each_parameter(const Mlp& net, const std::function<void(double)>& fn);

// --- Q-value heads and losses ----------------------------------------------

enum class DuelingAggregation {
  kMax,   // q = v + (a - max a)
  kMean,  // q = v + (a - mean a)
};

// Throws ShapeError for an empty advantage vector.
std::vector<double> dueling_aggregate(double value, std::span<const double> advantage,
                                      DuelingAggregation agg = DuelingAggregation::kMax);

// Smallest index attaining the maximum. Throws ShapeError when empty.
int argmax_action(std::span<const double> q);

// r if terminal, else r + gamma * max(q_next). q_next comes from the target network.
double td_target(double reward, std::span<const double> q_next, double gamma, bool terminal);

// Batch mean of squared errors.
double mse_loss(std::span<const double> pred, std::span<const double> targets);

}  // namespace overtake
