#include "blaze/thread_pool.hpp"

#include "blaze/random.hpp"

namespace blaze {

ThreadPool::ThreadPool(int threads, int rank) : rank_(rank) {
  if (threads < 1) threads = 1;
  workers_.reserve(threads - 1);
  for (int tid = 1; tid < threads; ++tid) {
    workers_.emplace_back([this, tid] { worker_loop(tid); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

void ThreadPool::seed_random(std::uint64_t seed) {
  std::lock_guard lock(mu_);
  rng_seed_ = seed;
  rng_epoch_ = random::detail::next_epoch();
}

void ThreadPool::enter_region(int tid) { random::detail::bind(rng_seed_, rng_epoch_, rank_, tid); }

void ThreadPool::run(const std::function<void(int)>& fn) {
  {
    std::lock_guard lock(mu_);
    job_ = &fn;
    pending_ = static_cast<int>(workers_.size());
    error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();

  std::exception_ptr local_error;
  try {
    enter_region(0);
    fn(0);
  } catch (...) {
    local_error = std::current_exception();
  }

  std::unique_lock lock(mu_);
  done_cv_.wait(lock, [&] { return pending_ == 0; });
  job_ = nullptr;
  if (local_error) std::rethrow_exception(local_error);
  if (error_) std::rethrow_exception(std::exchange(error_, nullptr));
}

void ThreadPool::worker_loop(int tid) {
  std::uint64_t seen = 0;
  for (;;) {
    const std::function<void(int)>* job = nullptr;
    {
      std::unique_lock lock(mu_);
      start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      job = job_;
    }
    try {
      enter_region(tid);
      (*job)(tid);
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!error_) error_ = std::current_exception();
    }
    {
      std::lock_guard lock(mu_);
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

}  // namespace blaze
