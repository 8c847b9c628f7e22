#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace overtake {

// SplitMix64 finalizer. Used to derive independent child seeds from a master
// seed so each episode / network / exploration stream is reproducible on its own.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix_seed(mix_seed(master ^ mix_seed(stream)) + index);
}

// Stream tags for derive_seed.
namespace seed_stream {
inline constexpr std::uint64_t kTrainEpisode = 1;
inline constexpr std::uint64_t kEvalEpisode = 2;
inline constexpr std::uint64_t kNetworkInit = 3;
inline constexpr std::uint64_t kExploration = 4;
inline constexpr std::uint64_t kReplay = 5;
}  // namespace seed_stream

// Deterministic random stream. The standard distributions are
// implementation-defined, so draws are computed here from raw 64-bit outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0, unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = engine_();
    while (r >= limit) r = engine_();
    return r % n;
  }

  std::string state() const;
  void set_state(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace overtake
