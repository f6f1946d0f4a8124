#include "voxevo/socket.hpp"

#include "voxevo/wire.hpp"

#include <fmt/format.h>

#include <arpa/inet.h>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

namespace voxevo::net {

Address parse_address(std::string_view text)
{
    Address a;
    std::string_view port_part = text;
    if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
        a.host = std::string(text.substr(0, colon));
        port_part = text.substr(colon + 1);
    }
    unsigned value = 0;
    auto [p, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), value);
    if (port_part.empty() || ec != std::errc{} || p != port_part.data() + port_part.size() || value > 65535)
        throw SocketError(fmt::format("invalid address '{}' (expected host:port)", text));
    a.port = static_cast<std::uint16_t>(value);
    return a;
}

std::string to_string(const Address& a) { return fmt::format("{}:{}", a.host, a.port); }

Socket& Socket::operator=(Socket&& o) noexcept
{
    if (this != &o) {
        close();
        fd_ = o.fd_;
        o.fd_ = -1;
    }
    return *this;
}

Socket::~Socket() { close(); }

void Socket::send_all(std::string_view data) const
{
    while (!data.empty()) {
        const ssize_t n = ::send(fd_, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw SocketError(fmt::format("send failed: {}", std::strerror(errno)));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

void Socket::shutdown() const noexcept
{
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::close() noexcept
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

namespace {

struct AddrInfo {
    addrinfo* head = nullptr;
    ~AddrInfo()
    {
        if (head) freeaddrinfo(head);
    }
};

AddrInfo resolve(const Address& addr, bool passive)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    AddrInfo info;
    const std::string port = std::to_string(addr.port);
    const char* host = addr.host.empty() ? (passive ? nullptr : "127.0.0.1") : addr.host.c_str();
    if (const int rc = getaddrinfo(host, port.c_str(), &hints, &info.head); rc != 0)
        throw SocketError(fmt::format("cannot resolve '{}': {}", to_string(addr), gai_strerror(rc)));
    return info;
}

}  // namespace

Socket connect_to(const Address& addr)
{
    const AddrInfo info = resolve(addr, false);
    std::string last = "no addresses";
    for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
        Socket s(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
        if (!s.valid()) continue;
        if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
            const int one = 1;
            ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return s;
        }
        last = std::strerror(errno);
    }
    throw SocketError(fmt::format("cannot connect to {}: {}", to_string(addr), last));
}

Listener::Listener(const Address& addr)
{
    const AddrInfo info = resolve(addr, true);
    const addrinfo* ai = info.head;
    sock_ = Socket(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
    if (!sock_.valid()) throw SocketError(fmt::format("socket: {}", std::strerror(errno)));
    const int one = 1;
    ::setsockopt(sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(sock_.fd(), ai->ai_addr, ai->ai_addrlen) != 0)
        throw SocketError(fmt::format("cannot bind {}: {}", to_string(addr), std::strerror(errno)));
    if (::listen(sock_.fd(), 64) != 0) throw SocketError(fmt::format("listen: {}", std::strerror(errno)));
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(sock_.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

Socket Listener::accept()
{
    for (;;) {
        const int fd = ::accept4(sock_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
        if (fd >= 0) {
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return Socket(fd);
        }
        if (errno == EINTR || errno == ECONNABORTED) continue;
        return Socket();
    }
}

void Listener::shutdown() noexcept { sock_.shutdown(); }

std::optional<std::string> LineReader::next()
{
    for (;;) {
        const auto nl = buf_.find('\n', scan_);
        if (nl != std::string::npos) {
            if (nl + 1 > limit_) throw wire::ProtocolError(wire::ProtocolErrc::FrameTooLarge, fmt::format("{} bytes", nl + 1));
            std::string line = buf_.substr(0, nl);
            buf_.erase(0, nl + 1);
            scan_ = 0;
            return line;
        }
        scan_ = buf_.size();
        if (buf_.size() > limit_) throw wire::ProtocolError(wire::ProtocolErrc::FrameTooLarge, "frame exceeds limit");
        if (eof_) {
            if (buf_.empty()) return std::nullopt;
            std::string rest = std::move(buf_);
            buf_.clear();
            scan_ = 0;
            return rest;
        }
        char chunk[65536];
        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            eof_ = true;
            continue;
        }
        buf_.append(chunk, static_cast<std::size_t>(n));
    }
}

}  // namespace voxevo::net
