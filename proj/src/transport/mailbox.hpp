#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "blaze/error.hpp"
#include "blaze/wire.hpp"

namespace blaze::detail {

// Incoming queues of one rank, keyed by (source, tag).
class Mailbox {
 public:
  explicit Mailbox(int size) : closed_(size, false) {}

  void push(int src, std::uint64_t tag, Bytes payload) {
    {
      std::lock_guard lock(mu_);
      queues_[{src, tag}].push_back(std::move(payload));
    }
    cv_.notify_all();
  }

  // Marks src as gone; queued messages stay receivable.
  void close(int src, std::string reason) {
    {
      std::lock_guard lock(mu_);
      closed_[src] = true;
      if (reason_.size() < closed_.size()) reason_.resize(closed_.size());
      reason_[src] = std::move(reason);
    }
    cv_.notify_all();
  }

  Bytes pop(int src, std::uint64_t tag) {
    std::unique_lock lock(mu_);
    const auto key = std::make_pair(src, tag);
    for (;;) {
      auto it = queues_.find(key);
      if (it != queues_.end() && !it->second.empty()) {
        Bytes out = std::move(it->second.front());
        it->second.pop_front();
        if (it->second.empty()) queues_.erase(it);
        return out;
      }
      if (closed_[src]) {
        std::string why = src < static_cast<int>(reason_.size()) ? reason_[src] : std::string();
        throw TransportError("peer rank " + std::to_string(src) + " disconnected" +
                             (why.empty() ? std::string() : " (" + why + ")"));
      }
      cv_.wait(lock);
    }
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::pair<int, std::uint64_t>, std::deque<Bytes>> queues_;
  std::vector<bool> closed_;
  std::vector<std::string> reason_;
};

}  // namespace blaze::detail
