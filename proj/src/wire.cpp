#include "voxevo/wire.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace voxevo::wire {

using nlohmann::json;

const char* to_string(ProtocolErrc e) noexcept
{
    switch (e) {
    case ProtocolErrc::MalformedFrame: return "malformed-frame";
    case ProtocolErrc::UnsupportedVersion: return "unsupported-version";
    case ProtocolErrc::FrameTooLarge: return "frame-too-large";
    }
    return "protocol-error";
}

ProtocolError::ProtocolError(ProtocolErrc code, const std::string& detail)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), detail)), code_(code)
{
}

std::string base64_encode(std::string_view bytes)
{
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text)
{
    if (text.size() % 4 != 0) throw ProtocolError(ProtocolErrc::MalformedFrame, "base64 length is not a multiple of 4");
    std::string out(3 * (text.size() / 4), '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) throw ProtocolError(ProtocolErrc::MalformedFrame, "invalid base64 payload");
    // EVP_DecodeBlock keeps the bytes produced by padding
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() >= 2 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

namespace {

json params_to_json(const SimParams& p)
{
    return json{{"voxel_len", p.voxel_len},
                {"stiffness", p.stiffness},
                {"damping_ratio", p.damping_ratio},
                {"mass", p.mass},
                {"actuation_amp", p.actuation_amp},
                {"actuation_freq", p.actuation_freq},
                {"duration", p.duration},
                {"dt", p.dt},
                {"gravity", p.gravity}};
}

SimParams params_from_json(const json& j)
{
    SimParams p;
    if (!j.is_object()) throw ProtocolError(ProtocolErrc::MalformedFrame, "sim_params must be an object");
    // absent keys keep their defaults
    auto opt = [&](const char* key, double& dst) {
        if (auto it = j.find(key); it != j.end()) dst = it->get<double>();
    };
    opt("voxel_len", p.voxel_len);
    opt("stiffness", p.stiffness);
    opt("damping_ratio", p.damping_ratio);
    opt("mass", p.mass);
    opt("actuation_amp", p.actuation_amp);
    opt("actuation_freq", p.actuation_freq);
    opt("duration", p.duration);
    opt("dt", p.dt);
    opt("gravity", p.gravity);
    return p;
}

struct Encoder {
    json operator()(const Hello& m) const
    {
        return {{"type", "hello"}, {"role", m.role == Role::Worker ? "worker" : "client"}, {"id", m.id}};
    }
    json operator()(const JobRequest&) const { return {{"type", "job_request"}}; }
    json operator()(const Job& m) const
    {
        return {{"type", "job"},
                {"job_id", m.job.job_id},
                {"morphology_id", m.job.morphology_id},
                {"controller", base64_encode(m.job.controller)},
                {"sim_params", params_to_json(m.job.sim_params)}};
    }
    json operator()(const Result& m) const
    {
        const auto& r = m.result;
        return {{"type", "result"},
                {"job_id", r.job_id},
                {"displacement", r.displacement},
                {"status", eval_status_name(r.status)},
                {"message", r.message},
                {"worker_id", r.worker_id},
                {"elapsed_ms", r.elapsed_ms}};
    }
    json operator()(const Shutdown&) const { return {{"type", "shutdown"}}; }
};

}  // namespace

std::string encode_message(const Message& msg)
{
    json j = std::visit(Encoder{}, msg);
    j["v"] = kVersion;
    std::string out = j.dump();
    if (out.size() + 1 > kMaxFrame) throw ProtocolError(ProtocolErrc::FrameTooLarge, fmt::format("{} bytes", out.size() + 1));
    out.push_back('\n');
    return out;
}

Message decode_message(std::string_view frame)
{
    if (frame.size() > kMaxFrame) throw ProtocolError(ProtocolErrc::FrameTooLarge, fmt::format("{} bytes", frame.size()));
    if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
    if (frame.find('\n') != std::string_view::npos) throw ProtocolError(ProtocolErrc::MalformedFrame, "embedded newline");

    json j = json::parse(frame, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError(ProtocolErrc::MalformedFrame, "not a JSON object");
    const auto v = j.find("v");
    if (v == j.end() || !v->is_number_integer()) throw ProtocolError(ProtocolErrc::MalformedFrame, "missing version");
    if (v->get<long long>() != kVersion) throw ProtocolError(ProtocolErrc::UnsupportedVersion, fmt::format("version {}", v->dump()));

    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "hello") {
            const std::string role = j.at("role").get<std::string>();
            if (role != "worker" && role != "client") throw ProtocolError(ProtocolErrc::MalformedFrame, "unknown role");
            return Hello{role == "worker" ? Role::Worker : Role::Client, j.value("id", std::string{})};
        }
        if (type == "job_request") return JobRequest{};
        if (type == "shutdown") return Shutdown{};
        if (type == "job") {
            EvalJob job;
            job.job_id = j.at("job_id").get<std::uint64_t>();
            job.morphology_id = j.at("morphology_id").get<std::string>();
            job.controller = base64_decode(j.at("controller").get<std::string>());
            if (auto it = j.find("sim_params"); it != j.end()) job.sim_params = params_from_json(*it);
            return Job{std::move(job)};
        }
        if (type == "result") {
            EvalResult r;
            r.job_id = j.at("job_id").get<std::uint64_t>();
            r.displacement = j.at("displacement").get<double>();
            const auto status = eval_status_from_name(j.at("status").get<std::string>());
            if (!status) throw ProtocolError(ProtocolErrc::MalformedFrame, "unknown status");
            r.status = *status;
            r.message = j.value("message", std::string{});
            r.worker_id = j.value("worker_id", std::string{});
            r.elapsed_ms = j.value("elapsed_ms", 0.0);
            return Result{std::move(r)};
        }
        throw ProtocolError(ProtocolErrc::MalformedFrame, fmt::format("unknown message type '{}'", type));
    } catch (const json::exception& e) {
        throw ProtocolError(ProtocolErrc::MalformedFrame, e.what());
    }
}

}  // namespace voxevo::wire
