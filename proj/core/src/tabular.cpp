#include <algorithm>

#include "overtake/agents.hpp"
#include "overtake/error.hpp"

namespace overtake {

std::vector<double> QTable::values(std::int64_t state) const {
  const auto it = table_.find(state);
  return it == table_.end() ? std::vector<double>(action_count_, 0.0) : it->second;
}

double QTable::get(std::int64_t state, int action) const {
  const auto it = table_.find(state);
  return it == table_.end() ? 0.0 : it->second.at(action);
}

void QTable::set(std::int64_t state, int action, double q) {
  auto [it, inserted] = table_.try_emplace(state, std::vector<double>(action_count_, 0.0));
  it->second.at(action) = q;
}

void tabular_q_update(QTable& q, std::int64_t s, int a, double r, std::int64_t s_next,
                      bool terminal, double alpha, double gamma) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInputError("tabular_q_update: alpha outside [0, 1]");
  double target = r;
  if (!terminal) {
    const auto next = q.values(s_next);
    target += gamma * *std::max_element(next.begin(), next.end());
  }
  const double old = q.get(s, a);
  q.set(s, a, old + alpha * (target - old));
}

Gridworld::Gridworld(int rows, int cols, int goal_row, int goal_col, double goal_reward,
                     double step_reward)
    : rows_(rows), cols_(cols), goal_(goal_row * cols + goal_col), goal_reward_(goal_reward),
      step_reward_(step_reward) {
  if (rows <= 0 || cols <= 0) throw ConfigError("gridworld: dimensions must be positive");
  if (goal_row < 0 || goal_row >= rows || goal_col < 0 || goal_col >= cols)
    throw ConfigError("gridworld: goal outside the grid");
}

Gridworld::Outcome Gridworld::step(std::int64_t s, int action) const {
  int r = static_cast<int>(s / cols_), c = static_cast<int>(s % cols_);
  switch (action) {
    case 0: r = std::max(r - 1, 0); break;
    case 1: r = std::min(r + 1, rows_ - 1); break;
    case 2: c = std::max(c - 1, 0); break;
    case 3: c = std::min(c + 1, cols_ - 1); break;
    default: throw InvalidInputError("gridworld: action must be in 0..3");
  }
  const std::int64_t next = static_cast<std::int64_t>(r) * cols_ + c;
  if (next == goal_) return {next, goal_reward_, true};
  return {next, step_reward_, false};
}

QTable train_tabular(const Gridworld& grid, const TabularRunConfig& cfg, std::uint64_t seed) {
  QTable q(Gridworld::kActions);
  Rng rng(seed);
  std::int64_t total_steps = 0;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    std::int64_t s;
    do {
      s = static_cast<std::int64_t>(rng.below(grid.state_count()));
    } while (grid.is_terminal(s));
    for (int t = 0; t < cfg.max_steps; ++t) {
      const double eps = epsilon(total_steps++, cfg.epsilon);
      const auto row = q.values(s);
      const int a = select_action(row, eps, rng);
      const auto out = grid.step(s, a);
      tabular_q_update(q, s, a, out.reward, out.next, out.terminal, cfg.alpha, cfg.gamma);
      if (out.terminal) break;
      s = out.next;
    }
  }
  return q;
}

}  // namespace overtake
