#pragma once

#include <cstdint>

namespace blaze::random {

// Counter-based stream: output n is a bijective mix of (key, n). A key is
// derived from (seed, rank, thread), so each pool thread draws its own
// reproducible sequence and no state is shared between threads.
class CounterRng {
 public:
  constexpr CounterRng() = default;
  CounterRng(std::uint64_t seed, std::uint64_t rank, std::uint64_t thread) noexcept;

  std::uint64_t next() noexcept {
    std::uint64_t z = key_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

namespace detail {
constinit inline thread_local CounterRng tls_stream{};
}  // namespace detail

// Stream bound to the calling pool thread. Thread pools rebind it whenever a
// region starts under a new seed.
inline CounterRng& thread_stream() noexcept { return detail::tls_stream; }

// Uniform in [0, 1) from the calling thread's stream.
inline double uniform() noexcept { return thread_stream().uniform(); }

// Standard normal via Box-Muller on the calling thread's stream.
double normal() noexcept;

namespace detail {
// Rebinds the thread stream if (epoch, rank, thread) differ from the last binding.
void bind(std::uint64_t seed, std::uint64_t epoch, int rank, int thread) noexcept;
// Fresh process-wide epoch for change detection.
std::uint64_t next_epoch() noexcept;
}  // namespace detail

}  // namespace blaze::random
