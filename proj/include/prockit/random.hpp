#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace prockit {

// 64-bit FNV-1a. Used to derive per-item seeds and cache validators.
std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

// Mixes a run seed with a stable key so each item gets its own stream
// regardless of processing order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fixed by the standard; the distribution helpers below replace the
// implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  // Uniform real in [0, 1) with 53 bits of precision.
  double uniform_real();

  // Fisher-Yates over any random-access range.
  template <typename Range>
  void shuffle(Range& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace prockit
