#pragma once

#include <cstddef>
#include <vector>

#include "overtake/env.hpp"
#include "overtake/rng.hpp"

namespace overtake {

struct Transition {
  Observation s;
  int a = 0;  // 0-based action slot
  double r = 0.0;
  Observation s_next;
  bool done = false;
};

// Fixed-capacity ring buffer; the oldest transition is evicted when full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  // Uniform with replacement. Throws UnderfullError when size() < batch.
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Oldest first.
  std::vector<Transition> contents() const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

}  // namespace overtake
