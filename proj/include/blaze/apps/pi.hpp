#pragma once

#include <cstdint>

#include "blaze/dist_range.hpp"
#include "blaze/mapreduce.hpp"
#include "blaze/random.hpp"

namespace blaze::apps {

struct PiResult {
  double estimate = 0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  JobStats stats;
};

struct UniformSampler {
  double operator()() const noexcept { return random::uniform(); }
};

// Monte Carlo estimate 4 * hits / n, where a hit is x^2 + y^2 < 1 for two
// draws from `sample`. The per-thread streams are reseeded with `seed`, so a
// fixed (seed, workers, threads) gives the same hits every run. Collective.
template <class Sampler = UniformSampler>
PiResult monte_carlo_pi(Context& ctx, std::uint64_t n, std::uint64_t seed, Sampler sample = {}) {
  if (n == 0) throw UsageError("pi estimation needs at least one sample");
  ctx.seed_random(seed);
  const DistRange<std::uint64_t> samples(ctx, 0, n);
  std::vector<std::uint64_t> count(1);
  PiResult r;
  r.stats = mapreduce<std::size_t, std::uint64_t>(
      samples,
      [&sample](std::uint64_t, const auto& emit) {
        const double x = sample();
        const double y = sample();
        if (x * x + y * y < 1) emit(0, 1);
      },
      "sum", count);
  r.hits = count[0];
  r.samples = n;
  r.estimate = 4.0 * static_cast<double>(count[0]) / static_cast<double>(n);
  return r;
}

}  // namespace blaze::apps
