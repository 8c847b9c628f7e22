#pragma once

// Central finite-difference check of QNetwork::backward on the scalar loss
// L = sum(C .* Q(x)) for a fixed random C.

#include <algorithm>
#include <cmath>
#include <vector>

#include "overtake/q_network.hpp"
#include "overtake/rng.hpp"

namespace gradcheck {

// Relative error with a floor so that two vanishing partials compare absolutely.
inline double relative_error(double a, double b, double floor = 1e-5) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, overtake::Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

inline bool away_from_kinks(const overtake::MlpCache& c, bool relu_output, double margin) {
  for (std::size_t l = 0; l < c.pre.size(); ++l) {
    if (l + 1 == c.pre.size() && !relu_output) break;
    if ((c.pre[l].array().abs() < margin).any()) return false;
  }
  return true;
}

// True when no rectifier input and no advantage ranking sits within `margin`
// of a switch, so an h-sized perturbation stays on one linear piece.
inline bool away_from_kinks(const overtake::QNetwork& net, const Eigen::MatrixXd& x,
                            double margin) {
  overtake::QCache cache;
  net.forward(x, &cache);
  if (!net.is_dueling())
    return away_from_kinks(std::get<overtake::MlpCache>(cache),
                           net.plain().output_activation == overtake::Activation::kRelu, margin);
  const auto& c = std::get<overtake::DuelingCache>(cache);
  if (!away_from_kinks(c.trunk, true, margin) || !away_from_kinks(c.value, false, margin) ||
      !away_from_kinks(c.advantage, false, margin))
    return false;
  if (net.dueling().aggregation == overtake::DuelingAggregation::kMax) {
    const Eigen::MatrixXd& a = c.advantage.pre.back();
    for (Eigen::Index n = 0; n < a.cols(); ++n) {
      std::vector<double> col(a.col(n).data(), a.col(n).data() + a.rows());
      std::sort(col.begin(), col.end());
      if (col.size() > 1 && col[col.size() - 1] - col[col.size() - 2] < margin) return false;
    }
  }
  return true;
}

inline double loss(const overtake::QNetwork& net, const Eigen::MatrixXd& x,
                   const Eigen::MatrixXd& c) {
  return (net.forward(x).array() * c.array()).sum();
}

// Max relative error over every parameter.
inline double max_error(const overtake::QNetwork& net, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& c, double h = 1e-5) {
  overtake::QCache cache;
  net.forward(x, &cache);
  const overtake::QNetwork grads = net.backward(cache, c);
  std::vector<double> analytic;
  grads.for_each_parameter([&](double g) { analytic.push_back(g); });

  overtake::QNetwork probe = net;
  std::vector<double*> slots;
  probe.for_each_parameter([&](double& p) { slots.push_back(&p); });

  double worst = 0.0;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const double saved = *slots[k];
    *slots[k] = saved + h;
    const double up = loss(probe, x, c);
    *slots[k] = saved - h;
    const double down = loss(probe, x, c);
    *slots[k] = saved;
    worst = std::max(worst, relative_error(analytic[k], (up - down) / (2.0 * h)));
  }
  return worst;
}

struct Case {
  overtake::QNetwork net;
  Eigen::MatrixXd x, c;
  bool clean = false;  // inputs found away from every kink
};

// Random architecture with every width <= 8. Parameters are redrawn in [-1, 1]
// so biases are exercised too.
inline Case random_case(overtake::Rng& rng, bool dueling, double margin = 1e-3) {
  using overtake::QNetwork;
  const int in = 1 + static_cast<int>(rng.below(8));
  const int out = 1 + static_cast<int>(rng.below(8));
  const int batch = 1 + static_cast<int>(rng.below(4));
  Case k;
  if (dueling) {
    const int hidden = 1 + static_cast<int>(rng.below(8));
    const auto agg = rng.below(2) ? overtake::DuelingAggregation::kMean
                                  : overtake::DuelingAggregation::kMax;
    k.net = QNetwork::make_dueling(in, hidden, std::max(out, 2), rng, agg);
  } else {
    std::vector<int> dims{in};
    const int depth = 1 + static_cast<int>(rng.below(3));
    for (int i = 0; i < depth; ++i) dims.push_back(1 + static_cast<int>(rng.below(8)));
    dims.push_back(out);
    k.net = QNetwork(overtake::make_mlp(dims, overtake::Activation::kIdentity, rng));
  }
  for (int attempt = 0;; ++attempt) {
    k.net.for_each_parameter([&](double& p) { p = rng.uniform(-1, 1); });
    k.x = random_matrix(k.net.input_dim(), batch, rng, 2.0);
    k.clean = away_from_kinks(k.net, k.x, margin);
    if (k.clean || attempt > 1000) break;
  }
  k.c = random_matrix(k.net.action_count(), batch, rng);
  return k;
}

}  // namespace gradcheck
