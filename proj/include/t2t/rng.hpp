#pragma once

#include <cstdint>
#include <vector>

namespace t2t {

// SplitMix64 generator. Self-contained so that every draw is reproducible
// across platforms and standard libraries; std distributions are not
// guaranteed to produce identical streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double next_double();

  // Uniform on [0, n), n > 0. Rejection-free modulo bias is irrelevant here
  // (n is tiny), but we use multiply-shift for uniformity anyway.
  std::uint64_t next_below(std::uint64_t n);

  // Uniform on [lo, hi].
  double next_uniform(double lo, double hi);

  // Pick an index with probability proportional to the given weights.
  // Weights must be non-negative and sum to a positive value.
  std::size_t next_weighted(const std::vector<double>& weights);

  // Independent child stream. Streams derived with distinct ids are
  // statistically independent of each other and of the parent.
  Rng split(std::uint64_t stream_id) const;

 private:
  std::uint64_t state_;
};

}  // namespace t2t
