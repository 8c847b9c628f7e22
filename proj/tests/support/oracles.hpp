#pragma once

// Straight-line reference implementations used to cross-check the library.
// They are deliberately written without sharing code with core/.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

struct Idm {
  double a_max, delta, T, b, d0, v_tar;
  bool relative_gap;
};

inline double idm(const Idm& p, double v, double dv, std::optional<double> gap) {
  double s_star;
  if (p.relative_gap) {
    s_star = p.d0 + p.T * dv + v * dv / (2.0 * std::sqrt(p.a_max * p.b));
  } else {
    double dyn = v * p.T + (v * dv) / (2.0 * std::sqrt(p.a_max * p.b));
    if (dyn < 0.0) dyn = 0.0;
    s_star = p.d0 + dyn;
  }
  double inner = 1.0 - std::pow(v / p.v_tar, p.delta);
  if (gap) inner -= (s_star / *gap) * (s_star / *gap);
  double a = p.a_max * inner;
  if (a > p.a_max) a = p.a_max;
  if (a < -p.a_max) a = -p.a_max;
  return a;
}

inline bool mobil_safe(double a_new_follower, double b_safe) {
  return !(a_new_follower < -b_safe);
}

// Absent followers contribute nothing.
inline double mobil_gain(double ego_new, double ego_old, const double* i_new,
                         const double* i_old, const double* j_new, const double* j_old,
                         double z) {
  double others = 0.0;
  if (i_new && i_old) others += *i_new - *i_old;
  if (j_new && j_old) others += *j_new - *j_old;
  return ego_new - ego_old + z * others;
}

// Plain dense forward pass written with explicit loops. Weights are row-major
// out x in; hidden layers rectified, output layer identity or rectified.
struct Layer {
  int in, out;
  std::vector<double> w, b;
};

inline std::vector<double> mlp(const std::vector<Layer>& layers, std::vector<double> x,
                               bool relu_output) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    std::vector<double> y(L.out);
    for (int o = 0; o < L.out; ++o) {
      double s = L.b[o];
      for (int i = 0; i < L.in; ++i) s += L.w[o * L.in + i] * x[i];
      const bool rect = l + 1 < layers.size() || relu_output;
      y[o] = rect ? (s > 0.0 ? s : 0.0) : s;
    }
    x = std::move(y);
  }
  return x;
}

// Value iteration on a deterministic grid with 4 moves (up, down, left, right),
// walls keep the agent in place, entering the goal pays goal_reward and ends.
struct GridSolution {
  std::vector<double> v;
  std::vector<std::vector<double>> q;
  double last_delta;
  int sweeps;
};

inline GridSolution grid_value_iteration(int rows, int cols, int goal, double goal_reward,
                                         double step_reward, double gamma, double tol) {
  const int n = rows * cols;
  auto next = [&](int s, int a) {
    int r = s / cols, c = s % cols;
    if (a == 0) r = std::max(r - 1, 0);
    if (a == 1) r = std::min(r + 1, rows - 1);
    if (a == 2) c = std::max(c - 1, 0);
    if (a == 3) c = std::min(c + 1, cols - 1);
    return r * cols + c;
  };
  GridSolution out{std::vector<double>(n, 0.0), std::vector<std::vector<double>>(n), 0.0, 0};
  for (;;) {
    double delta = 0.0;
    std::vector<double> v2 = out.v;
    for (int s = 0; s < n; ++s) {
      if (s == goal) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < 4; ++a) {
        const int t = next(s, a);
        const double q = t == goal ? goal_reward : step_reward + gamma * out.v[t];
        best = std::max(best, q);
      }
      delta = std::max(delta, std::abs(best - out.v[s]));
      v2[s] = best;
    }
    out.v = v2;
    ++out.sweeps;
    out.last_delta = delta;
    if (delta <= tol) break;
  }
  for (int s = 0; s < n; ++s) {
    out.q[s].resize(4);
    for (int a = 0; a < 4; ++a) {
      const int t = next(s, a);
      out.q[s][a] = t == goal ? goal_reward : step_reward + gamma * out.v[t];
    }
  }
  return out;
}

inline std::vector<int> optimal_actions(const std::vector<double>& q, double tol = 1e-9) {
  const double best = *std::max_element(q.begin(), q.end());
  std::vector<int> out;
  for (int a = 0; a < static_cast<int>(q.size()); ++a)
    if (q[a] >= best - tol) out.push_back(a);
  return out;
}

}  // namespace oracle
