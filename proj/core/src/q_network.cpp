#include "overtake/q_network.hpp"

#include <array>
#include <cstring>

#include "overtake/error.hpp"

namespace overtake {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kTabular: return "tabular";
    case Algorithm::kDqn: return "dqn";
    case Algorithm::kDdqn: return "ddqn";
    case Algorithm::kReference: return "reference";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view s) {
  if (s == "tabular") return Algorithm::kTabular;
  if (s == "dqn") return Algorithm::kDqn;
  if (s == "ddqn") return Algorithm::kDdqn;
  if (s == "reference") return Algorithm::kReference;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

QNetwork QNetwork::make_dqn(int input_dim, int hidden, int actions, Rng& rng) {
  const std::array dims{input_dim, hidden, hidden, actions};
  return QNetwork(make_mlp(dims, Activation::kIdentity, rng));
}

QNetwork QNetwork::make_dueling(int input_dim, int hidden, int actions, Rng& rng,
                                DuelingAggregation agg) {
  DuelingNet net;
  net.aggregation = agg;
  net.trunk = make_mlp(std::array{input_dim, hidden}, Activation::kRelu, rng);
  net.value = make_mlp(std::array{hidden, hidden, 1}, Activation::kIdentity, rng);
  net.advantage = make_mlp(std::array{hidden, hidden, actions}, Activation::kIdentity, rng);
  return QNetwork(std::move(net));
}

int QNetwork::input_dim() const {
  return is_dueling() ? dueling().trunk.input_dim() : plain().input_dim();
}

int QNetwork::action_count() const {
  return is_dueling() ? dueling().advantage.output_dim() : plain().output_dim();
}

std::size_t QNetwork::parameter_count() const {
  if (!is_dueling()) return plain().parameter_count();
  const auto& d = dueling();
  return d.trunk.parameter_count() + d.value.parameter_count() + d.advantage.parameter_count();
}

Eigen::MatrixXd QNetwork::forward(const Eigen::MatrixXd& x, QCache* cache) const {
  if (!is_dueling()) {
    if (!cache) return overtake::forward(plain(), x);
    auto& c = cache->emplace<MlpCache>();
    return overtake::forward(plain(), x, &c);
  }

  const auto& net = dueling();
  DuelingCache local;
  DuelingCache& c = cache ? cache->emplace<DuelingCache>() : local;
  c.features = overtake::forward(net.trunk, x, cache ? &c.trunk : nullptr);
  const Eigen::MatrixXd v = overtake::forward(net.value, c.features, cache ? &c.value : nullptr);
  const Eigen::MatrixXd a =
      overtake::forward(net.advantage, c.features, cache ? &c.advantage : nullptr);
  if (v.rows() != 1) throw ShapeError("dueling: value stream must have one output");

  Eigen::MatrixXd q(a.rows(), a.cols());
  c.argmax_advantage.assign(a.cols(), 0);
  for (Eigen::Index n = 0; n < a.cols(); ++n) {
    std::span<const double> col(a.col(n).data(), static_cast<std::size_t>(a.rows()));
    const auto qn = dueling_aggregate(v(0, n), col, net.aggregation);
    c.argmax_advantage[n] = argmax_action(col);
    for (Eigen::Index i = 0; i < a.rows(); ++i) q(i, n) = qn[i];
  }
  return q;
}

std::vector<double> QNetwork::q_values(std::span<const double> x) const {
  const Eigen::MatrixXd in =
      Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::MatrixXd q = forward(in);
  return {q.data(), q.data() + q.size()};
}

QNetwork QNetwork::backward(const QCache& cache, const Eigen::MatrixXd& upstream) const {
  if (!is_dueling()) {
    const auto* c = std::get_if<MlpCache>(&cache);
    if (!c) throw StateError("backward: cache came from a different network kind");
    Mlp g;
    overtake::backward(plain(), *c, upstream, g);
    return QNetwork(std::move(g));
  }

  const auto* c = std::get_if<DuelingCache>(&cache);
  if (!c) throw StateError("backward: cache came from a different network kind");
  const auto& net = dueling();
  if (upstream.rows() != action_count()) throw ShapeError("backward: upstream has wrong rows");
  if (static_cast<Eigen::Index>(c->argmax_advantage.size()) != upstream.cols())
    throw StateError("backward: cache batch size does not match upstream");

  // q_i = v + a_i - anchor(a): dv = sum_i g_i; da_j = g_j - d(anchor)/da_j * sum_i g_i.
  const Eigen::RowVectorXd total = upstream.colwise().sum();
  Eigen::MatrixXd d_adv = upstream;
  if (net.aggregation == DuelingAggregation::kMax) {
    for (Eigen::Index n = 0; n < upstream.cols(); ++n) d_adv(c->argmax_advantage[n], n) -= total(n);
  } else {
    d_adv.rowwise() -= total / static_cast<double>(upstream.rows());
  }
  const Eigen::MatrixXd d_value = total;

  DuelingNet g;
  g.aggregation = net.aggregation;
  Eigen::MatrixXd d_features = overtake::backward(net.value, c->value, d_value, g.value);
  d_features += overtake::backward(net.advantage, c->advantage, d_adv, g.advantage);
  overtake::backward(net.trunk, c->trunk, d_features, g.trunk);
  return QNetwork(std::move(g));
}

void QNetwork::sgd_step(const QNetwork& grads, double lr) {
  if (is_dueling() != grads.is_dueling()) throw ShapeError("sgd_step: network kind mismatch");
  if (!is_dueling()) {
    overtake::sgd_step(plain(), grads.plain(), lr);
    return;
  }
  overtake::sgd_step(dueling().trunk, grads.dueling().trunk, lr);
  overtake::sgd_step(dueling().value, grads.dueling().value, lr);
  overtake::sgd_step(dueling().advantage, grads.dueling().advantage, lr);
}

QNetwork QNetwork::zeros_like() const {
  if (!is_dueling()) return QNetwork(overtake::zeros_like(plain()));
  DuelingNet z = dueling();
  z.trunk = overtake::zeros_like(z.trunk);
  z.value = overtake::zeros_like(z.value);
  z.advantage = overtake::zeros_like(z.advantage);
  return QNetwork(std::move(z));
}

void QNetwork::for_each_parameter(const std::function<void(double&)>& fn) {
  if (!is_dueling()) return overtake::for_each_parameter(plain(), fn);
  overtake::for_each_parameter(dueling().trunk, fn);
  overtake::for_each_parameter(dueling().value, fn);
  overtake::for_each_parameter(dueling().advantage, fn);
}

void QNetwork::for_each_parameter(const std::function<void(double)>& fn) const {
  if (!is_dueling()) return overtake::for_each_parameter(plain(), fn);
  overtake::for_each_parameter(dueling().trunk, fn);
  overtake::for_each_parameter(dueling().value, fn);
  overtake::for_each_parameter(dueling().advantage, fn);
}

std::uint64_t QNetwork::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for_each_parameter([&](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) h = (h ^ b) * 0x100000001b3ULL;
  });
  return h;
}

}  // namespace overtake
