#include <memory>

#include "blaze/transport.hpp"
#include "mailbox.hpp"

namespace blaze {

class InProcessHub {
 public:
  explicit InProcessHub(int size) {
    boxes_.reserve(size);
    for (int i = 0; i < size; ++i) boxes_.push_back(std::make_unique<detail::Mailbox>(size));
  }

  int size() const noexcept { return static_cast<int>(boxes_.size()); }
  detail::Mailbox& box(int rank) { return *boxes_[rank]; }

 private:
  std::vector<std::unique_ptr<detail::Mailbox>> boxes_;
};

namespace {

class InProcessTransport final : public Transport {
 public:
  InProcessTransport(std::shared_ptr<InProcessHub> hub, int rank) : hub_(std::move(hub)), rank_(rank) {}

  ~InProcessTransport() override {
    for (int r = 0; r < hub_->size(); ++r) hub_->box(r).close(rank_, "worker exited");
  }

  int rank() const noexcept override { return rank_; }
  int size() const noexcept override { return hub_->size(); }
  Backend backend() const noexcept override { return Backend::in_process; }

  void send(int dest, std::uint64_t tag, Bytes payload) override {
    hub_->box(dest).push(rank_, tag, std::move(payload));
  }

  Bytes recv(int src, std::uint64_t tag) override { return hub_->box(rank_).pop(src, tag); }

 private:
  std::shared_ptr<InProcessHub> hub_;
  int rank_;
};

}  // namespace

std::shared_ptr<InProcessHub> make_in_process_hub(int size) {
  if (size < 1) throw ConfigError("cluster size must be at least 1, got " + std::to_string(size));
  return std::make_shared<InProcessHub>(size);
}

std::unique_ptr<Transport> make_in_process_transport(std::shared_ptr<InProcessHub> hub, int rank) {
  if (!hub) throw ConfigError("in-process transport needs a hub");
  if (rank < 0 || rank >= hub->size()) {
    throw ConfigError("rank " + std::to_string(rank) + " out of range for cluster of size " +
                      std::to_string(hub->size()));
  }
  return std::make_unique<InProcessTransport>(std::move(hub), rank);
}

}  // namespace blaze
