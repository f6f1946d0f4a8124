#pragma once

#include "voxevo/evaluation.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace voxevo::wire {

inline constexpr int kVersion = 1;
inline constexpr std::size_t kMaxFrame = 16u << 20;

enum class ProtocolErrc { MalformedFrame, UnsupportedVersion, FrameTooLarge };
const char* to_string(ProtocolErrc e) noexcept;

class ProtocolError : public std::runtime_error {
public:
    ProtocolError(ProtocolErrc code, const std::string& detail);
    ProtocolErrc code() const noexcept { return code_; }

private:
    ProtocolErrc code_;
};

enum class Role { Worker, Client };

struct Hello {
    Role role = Role::Worker;
    std::string id;
    friend bool operator==(const Hello&, const Hello&) = default;
};
struct JobRequest {
    friend bool operator==(const JobRequest&, const JobRequest&) = default;
};
struct Job {
    EvalJob job;
    friend bool operator==(const Job&, const Job&) = default;
};
struct Result {
    EvalResult result;
    friend bool operator==(const Result&, const Result&) = default;
};
struct Shutdown {
    friend bool operator==(const Shutdown&, const Shutdown&) = default;
};

using Message = std::variant<Hello, JobRequest, Job, Result, Shutdown>;

/// One JSON object terminated by '\n'.
std::string encode_message(const Message& msg);
/// Accepts a single line with or without its trailing newline.
Message decode_message(std::string_view frame);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace voxevo::wire
