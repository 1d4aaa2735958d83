#include "blaze/random.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "blaze/wire.hpp"

namespace blaze::random {

namespace {

struct Binding {
  std::uint64_t epoch = 0;
  int rank = -1;
  int thread = -1;
};

thread_local Binding tls_binding;
std::atomic<std::uint64_t> g_epoch{0};

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t rank, std::uint64_t thread) noexcept
    : key_(mix64(mix64(mix64(seed) ^ (rank + 0x632be59bd9b4e019ULL)) ^ (thread + 0x8cb92ba72f3d8dd7ULL))) {}

double normal() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace detail {

void bind(std::uint64_t seed, std::uint64_t epoch, int rank, int thread) noexcept {
  auto& b = tls_binding;
  if (b.epoch == epoch && b.rank == rank && b.thread == thread) return;
  b = {epoch, rank, thread};
  tls_stream = CounterRng(seed, static_cast<std::uint64_t>(rank), static_cast<std::uint64_t>(thread));
}

std::uint64_t next_epoch() noexcept { return g_epoch.fetch_add(1) + 1; }

}  // namespace detail

}  // namespace blaze::random
