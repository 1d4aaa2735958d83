#pragma once

#include <exception>
#include <mutex>

#include "blaze/transport.hpp"

namespace blaze::detail {

// Runs fn(tid) on the worker's threads, capturing the first failure, then
// agrees on success with the other workers (see Context::check_job).
template <class Fn>
void run_checked(Context& ctx, Fn&& fn) {
  std::exception_ptr failure;
  std::mutex mu;
  try {
    ctx.parallel([&](int tid) {
      try {
        fn(tid);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  } catch (...) {
    if (!failure) failure = std::current_exception();
  }
  ctx.check_job(failure);
}

}  // namespace blaze::detail
