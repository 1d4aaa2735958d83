#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace blaze {

// Fixed team of threads executing SPMD regions. The calling thread takes part
// as thread 0, so a pool of size 1 spawns nothing.
class ThreadPool {
 public:
  // `rank` only labels the threads for the per-thread random streams.
  ThreadPool(int threads, int rank);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const noexcept { return static_cast<int>(workers_.size()) + 1; }

  // Runs fn(tid) on every thread, tid in [0, size()), and waits for all.
  // The first exception thrown by any thread is rethrown here.
  void run(const std::function<void(int)>& fn);

  // Seeds the per-thread random streams used inside subsequent regions.
  void seed_random(std::uint64_t seed);

 private:
  void worker_loop(int tid);
  void enter_region(int tid);

  int rank_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* job_ = nullptr;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stopping_ = false;
  std::exception_ptr error_;

  std::uint64_t rng_seed_ = 0;
  std::uint64_t rng_epoch_ = 0;
};

}  // namespace blaze
