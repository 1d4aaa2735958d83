#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>

#include "blaze/transport.hpp"

namespace blaze {

// BLAZE_BACKEND=threads|sockets; in-process threads when unset.
Backend backend_from_env();

struct LocalClusterOptions {
  int workers = 1;
  int threads = 1;
  // Defaults to backend_from_env().
  std::optional<Backend> backend;
  std::chrono::milliseconds connect_timeout{30000};
};

// Runs `job` once per worker on a cluster confined to this machine and returns
// rank 0's result string.
//
// in_process: one thread per worker sharing an in-memory hub.
// sockets: one forked process per worker, connected over loopback. Must be
// called while the process has no other running threads besides the caller.
//
// Throws Error describing the first worker failure.
std::string run_local_cluster(const LocalClusterOptions& options, const std::function<std::string(Context&)>& job);

}  // namespace blaze
