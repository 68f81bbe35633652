#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace topicmine {

// Seeded generator whose draws are identical on every platform: the engine
// is fully specified by the standard and all distributions are implemented
// here rather than taken from <random>, whose algorithms are unspecified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double gamma(double shape);
  std::vector<double> dirichlet(std::span<const double> alpha);
  std::vector<double> dirichlet(std::size_t k, double alpha);

  /// Index drawn proportionally to non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace topicmine
