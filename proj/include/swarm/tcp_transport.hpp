#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "swarm/transport.hpp"

namespace swarm {

// Real TCP endpoint: one frame per connection, an accept-loop thread feeds
// the handler. Addresses are "host:port". Pass port 0 to let the OS pick;
// local_address() reports the bound port.
//
// When a 32-byte pre-shared key is given, every frame travels inside an
// authenticated encryption envelope (XSalsa20-Poly1305, random nonce);
// frames from senders without the key fail authentication and are dropped.
// The handler always sees plaintext codec frames either way.
class TcpTransport : public Transport {
public:
    explicit TcpTransport(const std::string& bind_address,
                          std::optional<std::vector<std::uint8_t>> pre_shared_key = {});
    ~TcpTransport() override;

    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    void set_handler(Handler h) override;
    const std::string& local_address() const override { return address_; }
    bool send(const std::string& addr, std::span<const std::uint8_t> frame) override;
    std::uint64_t now_ms() override;
    void wait_ms(std::uint64_t ms) override;

    void shutdown();

private:
    void accept_loop();
    std::vector<std::uint8_t> seal(std::span<const std::uint8_t> frame) const;
    std::optional<std::vector<std::uint8_t>> open(std::span<const std::uint8_t> box) const;

    std::optional<std::vector<std::uint8_t>> psk_;
    int listen_fd_ = -1;
    std::string address_;
    Handler handler_;
    std::mutex handler_mu_;
    std::thread accept_thread_;
    std::atomic<bool> running_{false};
};

}  // namespace swarm
