#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace voxevo::net {

class SocketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Address {
    std::string host;  ///< empty binds every interface
    std::uint16_t port = 0;
};

/// `host:port`, `:port` or a bare port.
Address parse_address(std::string_view text);
std::string to_string(const Address& a);

/// Owning TCP socket.
class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    Socket& operator=(Socket&& o) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }

    /// Writes everything or throws SocketError.
    void send_all(std::string_view data) const;
    /// Wakes any thread blocked on this socket.
    void shutdown() const noexcept;
    void close() noexcept;

private:
    int fd_ = -1;
};

Socket connect_to(const Address& addr);

class Listener {
public:
    explicit Listener(const Address& addr);
    std::uint16_t port() const noexcept { return port_; }
    /// Returns an invalid socket once the listener is shut down.
    Socket accept();
    void shutdown() noexcept;

private:
    Socket sock_;
    std::uint16_t port_ = 0;
};

/// Splits a byte stream into '\n'-terminated frames of bounded size.
class LineReader {
public:
    LineReader(int fd, std::size_t limit) : fd_(fd), limit_(limit) {}

    /// Next frame without its newline; nullopt on EOF. A trailing partial
    /// frame at EOF is returned as is so the decoder can reject it.
    /// Throws wire::ProtocolError when a frame exceeds the limit.
    std::optional<std::string> next();

private:
    int fd_;
    std::size_t limit_;
    std::string buf_;
    std::size_t scan_ = 0;
    bool eof_ = false;
};

}  // namespace voxevo::net
