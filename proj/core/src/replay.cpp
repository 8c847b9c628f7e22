#include "overtake/replay.hpp"

#include "overtake/error.hpp"

namespace overtake {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (items_.size() < batch || batch == 0)
    throw UnderfullError("replay buffer holds " + std::to_string(items_.size()) +
                         " transitions, batch of " + std::to_string(batch) + " requested");
  std::vector<Transition> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(items_[rng.below(items_.size())]);
  return out;
}

std::vector<Transition> ReplayBuffer::contents() const {
  if (items_.size() < capacity_) return items_;
  std::vector<Transition> out;
  out.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) out.push_back(items_[(next_ + i) % capacity_]);
  return out;
}

}  // namespace overtake
