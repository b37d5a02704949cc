#include <condition_variable>
#include <deque>
#include <mutex>

#include "tunegrid/error.hpp"
#include "tunegrid/proto/transport.hpp"

namespace tunegrid::proto {
namespace {

struct Channel {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> frames[2];  // frames[i] are read by endpoint i
  bool closed = false;
};

class InProcConnection final : public Connection {
 public:
  InProcConnection(std::shared_ptr<Channel> channel, int side) : channel_(std::move(channel)), side_(side) {}
  ~InProcConnection() override { close(); }

  void send_frame(const std::string& frame) override {
    {
      std::lock_guard lock(channel_->mu);
      if (channel_->closed) throw Error(ErrorCode::kTransport, "in-process channel closed");
      channel_->frames[1 - side_].push_back(frame);
    }
    channel_->cv.notify_all();
  }

  std::optional<Message> receive() override {
    std::string frame;
    {
      std::unique_lock lock(channel_->mu);
      auto& inbox = channel_->frames[side_];
      channel_->cv.wait(lock, [&] { return !inbox.empty() || channel_->closed; });
      if (inbox.empty()) return std::nullopt;
      frame = std::move(inbox.front());
      inbox.pop_front();
    }
    return decode(frame);
  }

  void close() override {
    {
      std::lock_guard lock(channel_->mu);
      channel_->closed = true;
    }
    channel_->cv.notify_all();
  }

  std::string peer() const override { return side_ == 0 ? "inproc:manager" : "inproc:worker"; }

 private:
  std::shared_ptr<Channel> channel_;
  int side_;
};

}  // namespace

std::pair<std::unique_ptr<Connection>, std::unique_ptr<Connection>> make_inproc_pair() {
  auto channel = std::make_shared<Channel>();
  return {std::make_unique<InProcConnection>(channel, 0), std::make_unique<InProcConnection>(channel, 1)};
}

}  // namespace tunegrid::proto
