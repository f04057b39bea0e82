#include "swarm/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <sodium.h>

#include <chrono>
#include <cstring>
#include <vector>

#include "swarm/wire.hpp"

namespace swarm {

namespace {

bool parse_host_port(const std::string& addr, std::string& host, std::uint16_t& port) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) return false;
    host = addr.substr(0, colon);
    try {
        const unsigned long p = std::stoul(addr.substr(colon + 1));
        if (p > 65535) return false;
        port = static_cast<std::uint16_t>(p);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::read(fd, buf + got, n - got);
        if (r <= 0) return false;
        got += static_cast<std::size_t>(r);
    }
    return true;
}

bool write_all(int fd, const std::uint8_t* buf, std::size_t n) {
    std::size_t sent = 0;
    while (sent < n) {
        const ssize_t w = ::write(fd, buf + sent, n - sent);
        if (w <= 0) return false;
        sent += static_cast<std::size_t>(w);
    }
    return true;
}

}  // namespace

std::vector<std::uint8_t> TcpTransport::seal(std::span<const std::uint8_t> frame) const {
    std::vector<std::uint8_t> box(crypto_secretbox_NONCEBYTES + frame.size() +
                                  crypto_secretbox_MACBYTES);
    randombytes_buf(box.data(), crypto_secretbox_NONCEBYTES);
    crypto_secretbox_easy(box.data() + crypto_secretbox_NONCEBYTES, frame.data(), frame.size(),
                          box.data(), psk_->data());
    return box;
}

std::optional<std::vector<std::uint8_t>> TcpTransport::open(
    std::span<const std::uint8_t> box) const {
    if (box.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES) return {};
    std::vector<std::uint8_t> plain(box.size() - crypto_secretbox_NONCEBYTES -
                                    crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(plain.data(), box.data() + crypto_secretbox_NONCEBYTES,
                                   box.size() - crypto_secretbox_NONCEBYTES, box.data(),
                                   psk_->data()) != 0) {
        return {};
    }
    return plain;
}

TcpTransport::TcpTransport(const std::string& bind_address,
                           std::optional<std::vector<std::uint8_t>> pre_shared_key)
    : psk_(std::move(pre_shared_key)) {
    if (psk_) {
        if (sodium_init() < 0) {
            throw SwarmError(ErrorCode::TransportDown, "TcpTransport: sodium_init failed");
        }
        if (psk_->size() != crypto_secretbox_KEYBYTES) {
            throw SwarmError(ErrorCode::InvalidConfig, "TcpTransport: key must be 32 bytes");
        }
    }
    std::string host;
    std::uint16_t port = 0;
    if (!parse_host_port(bind_address, host, port)) {
        throw SwarmError(ErrorCode::InvalidConfig, "TcpTransport: bad address " + bind_address);
    }
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) {
        throw SwarmError(ErrorCode::TransportDown, "TcpTransport: socket() failed");
    }
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
        ::close(listen_fd_);
        throw SwarmError(ErrorCode::InvalidConfig, "TcpTransport: bad host " + host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0 ||
        ::listen(listen_fd_, 64) != 0) {
        ::close(listen_fd_);
        throw SwarmError(ErrorCode::TransportDown, "TcpTransport: bind/listen failed on " +
                                                       bind_address);
    }
    socklen_t len = sizeof(sa);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
    address_ = host + ":" + std::to_string(ntohs(sa.sin_port));

    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

TcpTransport::~TcpTransport() { shutdown(); }

void TcpTransport::shutdown() {
    bool expected = true;
    if (!running_.compare_exchange_strong(expected, false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
}

void TcpTransport::set_handler(Handler h) {
    std::lock_guard<std::mutex> lock(handler_mu_);
    handler_ = std::move(h);
}

void TcpTransport::accept_loop() {
    while (running_) {
        sockaddr_in peer{};
        socklen_t len = sizeof(peer);
        const int fd = ::accept(listen_fd_, reinterpret_cast<sockaddr*>(&peer), &len);
        if (fd < 0) {
            if (!running_) return;
            continue;
        }
        // One frame per connection; with a key the frame sits inside a
        // length-prefixed encrypted envelope.
        std::optional<std::vector<std::uint8_t>> frame;
        if (psk_) {
            std::uint8_t lenbuf[4];
            if (read_exact(fd, lenbuf, 4)) {
                std::uint32_t box_len = 0;
                for (int i = 0; i < 4; ++i) box_len |= std::uint32_t(lenbuf[i]) << (8 * i);
                if (box_len <= kMaxPayload) {
                    std::vector<std::uint8_t> box(box_len);
                    if (read_exact(fd, box.data(), box_len)) frame = open(box);
                }
            }
        } else {
            std::uint8_t header[kHeaderLen];
            if (read_exact(fd, header, kHeaderLen)) {
                std::uint32_t payload_len = 0;
                for (int i = 0; i < 4; ++i) {
                    payload_len |= std::uint32_t(header[10 + i]) << (8 * i);
                }
                if (payload_len <= kMaxPayload) {
                    std::vector<std::uint8_t> f(header, header + kHeaderLen);
                    f.resize(kHeaderLen + payload_len);
                    if (payload_len == 0 ||
                        read_exact(fd, f.data() + kHeaderLen, payload_len)) {
                        frame = std::move(f);
                    }
                }
            }
        }
        if (frame) {
            char ip[INET_ADDRSTRLEN] = {0};
            ::inet_ntop(AF_INET, &peer.sin_addr, ip, sizeof(ip));
            const std::string from =
                std::string(ip) + ":" + std::to_string(ntohs(peer.sin_port));
            std::lock_guard<std::mutex> lock(handler_mu_);
            if (handler_) handler_(*frame, from);
        }
        ::close(fd);
    }
}

bool TcpTransport::send(const std::string& addr, std::span<const std::uint8_t> frame) {
    std::string host;
    std::uint16_t port = 0;
    if (!parse_host_port(addr, host, port)) return false;
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return false;
    timeval tv{};
    tv.tv_sec = 5;  // matches the default broadcast ack timeout
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1 ||
        ::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
        ::close(fd);
        return false;
    }
    bool ok;
    if (psk_) {
        const std::vector<std::uint8_t> box = seal(frame);
        std::uint8_t lenbuf[4];
        for (int i = 0; i < 4; ++i) lenbuf[i] = (box.size() >> (8 * i)) & 0xff;
        ok = write_all(fd, lenbuf, 4) && write_all(fd, box.data(), box.size());
    } else {
        ok = write_all(fd, frame.data(), frame.size());
    }
    ::close(fd);
    return ok;
}

std::uint64_t TcpTransport::now_ms() {
    using namespace std::chrono;
    return static_cast<std::uint64_t>(
        duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count());
}

void TcpTransport::wait_ms(std::uint64_t ms) {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

}  // namespace swarm
