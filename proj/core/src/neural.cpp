#include "overtake/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "overtake/error.hpp"

namespace overtake {

std::vector<int> Mlp::dims() const {
  std::vector<int> d;
  if (layers.empty()) return d;
  d.push_back(input_dim());
  for (const auto& l : layers) d.push_back(static_cast<int>(l.weight.rows()));
  return d;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Mlp make_mlp(std::span<const int> dims, Activation output_activation, Rng& rng) {
  if (dims.size() < 2) throw ShapeError("make_mlp: need at least input and output dims");
  for (int d : dims)
    if (d <= 0) throw ShapeError("make_mlp: dims must be positive");
  Mlp net;
  net.output_activation = output_activation;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i], out = dims[i + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    // Row-major draw order, independent of Eigen's storage order.
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-limit, limit);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Mlp zeros_like(const Mlp& net) {
  Mlp z = net;
  for (auto& l : z.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return z;
}

namespace {

bool rectified(const Mlp& net, std::size_t layer) {
  return layer + 1 < net.layers.size() || net.output_activation == Activation::kRelu;
}

}  // namespace

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, MlpCache* cache) {
  if (net.layers.empty()) throw ShapeError("forward: empty network");
  if (x.rows() != net.input_dim())
    throw ShapeError("forward: input has " + std::to_string(x.rows()) + " rows, network expects " +
                     std::to_string(net.input_dim()));
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    Eigen::MatrixXd z = l.weight * h;
    z.colwise() += l.bias;
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(z);
    }
    h = rectified(net, i) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
  }
  return h;
}

std::vector<double> forward(const Mlp& net, std::span<const double> x) {
  const Eigen::MatrixXd in =
      Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::MatrixXd out = forward(net, in);
  return {out.data(), out.data() + out.size()};
}

Eigen::MatrixXd backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& upstream,
                         Mlp& grads) {
  const std::size_t n = net.layers.size();
  if (cache.inputs.size() != n || cache.pre.size() != n)
    throw StateError("backward: cache does not match the network depth");
  for (std::size_t i = 0; i < n; ++i) {
    if (cache.inputs[i].rows() != net.layers[i].weight.cols() ||
        cache.pre[i].rows() != net.layers[i].weight.rows() ||
        cache.inputs[i].cols() != upstream.cols())
      throw StateError("backward: cache shapes do not match the network");
  }
  if (upstream.rows() != net.output_dim()) throw ShapeError("backward: upstream has wrong rows");

  grads = zeros_like(net);
  Eigen::MatrixXd delta = upstream;
  for (std::size_t k = n; k-- > 0;) {
    if (rectified(net, k)) delta = delta.cwiseProduct((cache.pre[k].array() > 0.0).cast<double>().matrix());
    grads.layers[k].weight.noalias() = delta * cache.inputs[k].transpose();
    grads.layers[k].bias = delta.rowwise().sum();
    delta = net.layers[k].weight.transpose() * delta;
  }
  return delta;
}

void sgd_step(Mlp& params, const Mlp& grads, double lr) {
  if (!(lr > 0.0)) throw InvalidInputError("sgd_step: learning rate must be positive");
  if (params.dims() != grads.dims()) throw ShapeError("sgd_step: gradient shape mismatch");
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    params.layers[i].weight -= lr * grads.layers[i].weight;
    params.layers[i].bias -= lr * grads.layers[i].bias;
  }
}

void for_each_parameter(Mlp& net, const std::function<void(double&)>& fn) {
  for (auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) fn(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) fn(l.bias(r));
  }
}

void for_each_parameter(const Mlp& net, const std::function<void(double)>& fn) {
  for (const auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) fn(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) fn(l.bias(r));
  }
}

std::vector<double> dueling_aggregate(double value, std::span<const double> advantage,
                                      DuelingAggregation agg) {
  if (advantage.empty()) throw ShapeError("dueling_aggregate: empty advantage vector");
  const double anchor =
      agg == DuelingAggregation::kMax
          ? *std::max_element(advantage.begin(), advantage.end())
          : std::accumulate(advantage.begin(), advantage.end(), 0.0) / advantage.size();
  std::vector<double> q(advantage.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = value + (advantage[i] - anchor);
  return q;
}

int argmax_action(std::span<const double> q) {
  if (q.empty()) throw ShapeError("argmax_action: empty vector");
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

double td_target(double reward, std::span<const double> q_next, double gamma, bool terminal) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInputError("td_target: gamma outside [0, 1]");
  if (terminal) return reward;
  if (q_next.empty()) throw ShapeError("td_target: empty next-state values");
  return reward + gamma * *std::max_element(q_next.begin(), q_next.end());
}

double mse_loss(std::span<const double> pred, std::span<const double> targets) {
  if (pred.size() != targets.size()) throw ShapeError("mse_loss: length mismatch");
  if (pred.empty()) throw ShapeError("mse_loss: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = targets[i] - pred[i];
    sum += e * e;
  }
  return sum / static_cast<double>(pred.size());
}

}  // namespace overtake
