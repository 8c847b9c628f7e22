#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "overtake/neural.hpp"

namespace overtake {

enum class Algorithm { kTabular, kDqn, kDdqn, kReference };

std::string_view to_string(Algorithm a);
Algorithm algorithm_from_string(std::string_view s);  // throws ConfigError

// Shared trunk feeding a state-value stream and an advantage stream.
struct DuelingNet {
  Mlp trunk;      // input -> hidden, rectified output
  Mlp value;      // hidden -> hidden -> 1
  Mlp advantage;  // hidden -> hidden -> |A|
  DuelingAggregation aggregation = DuelingAggregation::kMax;

  friend bool operator==(const DuelingNet&, const DuelingNet&) = default;
};

struct DuelingCache {
  MlpCache trunk, value, advantage;
  Eigen::MatrixXd features;            // trunk output, hidden x batch
  std::vector<int> argmax_advantage;   // per sample, used by the max aggregation
};

using QCache = std::variant<MlpCache, DuelingCache>;

// Action-value network: either a plain MLP (DQN) or a dueling net (DDQN).
// Gradients are represented as a QNetwork of identical shape.
class QNetwork {
 public:
  QNetwork() = default;
  explicit QNetwork(Mlp plain) : net_(std::move(plain)) {}
  explicit QNetwork(DuelingNet dueling) : net_(std::move(dueling)) {}

  // input -> hidden -> hidden -> actions.
  static QNetwork make_dqn(int input_dim, int hidden, int actions, Rng& rng);
  // input -> hidden, then two hidden -> hidden -> {1, actions} streams.
  static QNetwork make_dueling(int input_dim, int hidden, int actions, Rng& rng,
                               DuelingAggregation agg = DuelingAggregation::kMax);

  bool is_dueling() const { return std::holds_alternative<DuelingNet>(net_); }
  Algorithm algorithm() const { return is_dueling() ? Algorithm::kDdqn : Algorithm::kDqn; }
  const Mlp& plain() const { return std::get<Mlp>(net_); }
  const DuelingNet& dueling() const { return std::get<DuelingNet>(net_); }
  Mlp& plain() { return std::get<Mlp>(net_); }
  DuelingNet& dueling() { return std::get<DuelingNet>(net_); }

  int input_dim() const;
  int action_count() const;
  std::size_t parameter_count() const;

  // x: input_dim x batch -> Q: actions x batch.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, QCache* cache = nullptr) const;
  std::vector<double> q_values(std::span<const double> x) const;

  // Gradient of the loss given dLoss/dQ (actions x batch).
  QNetwork backward(const QCache& cache, const Eigen::MatrixXd& upstream) const;

  void sgd_step(const QNetwork& grads, double lr);

  QNetwork zeros_like() const;

  // Visits every weight and bias in a fixed order (trunk, value, advantage).
  void for_each_parameter(const std::function<void(double&)>& fn);
  void for_each_parameter(const std::function<void(double)>& fn) const;

  // FNV-1a over the raw parameter bytes.
  std::uint64_t fingerprint() const;

  friend bool operator==(const QNetwork&, const QNetwork&) = default;

 private:
  std::variant<Mlp, DuelingNet> net_;
};

}  // namespace overtake
