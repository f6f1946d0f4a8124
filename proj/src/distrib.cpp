#include "voxevo/distrib.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <unistd.h>

namespace voxevo {

std::string default_bind_address()
{
    if (const char* env = std::getenv("VOXEVO_BIND"); env && *env) return env;
    return "127.0.0.1:7878";
}

struct Master::Connection {
    std::uint64_t id = 0;
    net::Socket sock;
    std::mutex send_mu;

    void send(const wire::Message& m)
    {
        const std::string frame = wire::encode_message(m);
        std::lock_guard lock(send_mu);
        sock.send_all(frame);
    }
};

struct Master::Owner {
    virtual ~Owner() = default;
    virtual void deliver(std::uint64_t key, EvalResult r) = 0;
};

struct Master::ClientOwner final : Master::Owner {
    std::weak_ptr<Connection> conn;

    explicit ClientOwner(std::weak_ptr<Connection> c) : conn(std::move(c)) {}
    void deliver(std::uint64_t key, EvalResult r) override
    {
        r.job_id = key;
        if (auto c = conn.lock()) {
            try {
                c->send(wire::Result{std::move(r)});
            } catch (const std::exception&) {
                // client went away; its handler cleans up
            }
        }
    }
};

struct Master::BatchOwner final : Master::Owner {
    std::mutex mu;
    std::condition_variable cv;
    std::vector<std::uint64_t> ids;
    std::vector<std::optional<EvalResult>> slots;
    std::size_t filled = 0;

    void deliver(std::uint64_t key, EvalResult r) override
    {
        std::lock_guard lock(mu);
        auto& slot = slots.at(key);
        if (slot) return;
        r.job_id = ids.at(key);
        slot = std::move(r);
        ++filled;
        cv.notify_all();
    }
};

Master::Master(const std::string& bind_address, MasterOptions options)
    : options_(options), listener_(net::parse_address(bind_address))
{
    acceptor_ = std::thread([this] { accept_loop(); });
    reaper_ = std::thread([this] { reap_loop(); });
}

Master::~Master() { stop(); }

void Master::stop()
{
    std::vector<std::shared_ptr<Connection>> conns;
    {
        std::lock_guard lock(mu_);
        if (stopping_ && !acceptor_.joinable()) return;
        stopping_ = true;
        for (auto& [id, c] : connections_) conns.push_back(c);
    }
    cv_.notify_all();
    listener_.shutdown();
    if (acceptor_.joinable()) acceptor_.join();
    if (reaper_.joinable()) reaper_.join();
    for (auto& c : conns) {
        try {
            c->send(wire::Shutdown{});
        } catch (const std::exception&) {
        }
        c->sock.shutdown();
    }
    for (auto& h : handlers_)
        if (h.thread.joinable()) h.thread.join();
    handlers_.clear();
}

MasterStats Master::stats() const
{
    std::lock_guard lock(mu_);
    return stats_;
}

std::size_t Master::worker_count() const
{
    std::lock_guard lock(mu_);
    return connections_.size();
}

void Master::accept_loop()
{
    for (;;) {
        net::Socket s = listener_.accept();
        if (!s.valid()) return;
        auto conn = std::make_shared<Connection>();
        conn->sock = std::move(s);
        {
            std::lock_guard lock(mu_);
            if (stopping_) return;
            conn->id = next_conn_++;
        }
        // reclaim finished handler threads
        std::erase_if(handlers_, [](Handler& h) {
            if (!h.done->load()) return false;
            h.thread.join();
            return true;
        });
        auto done = std::make_shared<std::atomic<bool>>(false);
        handlers_.push_back({done, std::thread([this, conn, done] {
                                 serve_connection(conn);
                                 done->store(true);
                             })});
    }
}

void Master::reap_loop()
{
    const auto tick = std::clamp(options_.job_timeout / 4, std::chrono::milliseconds(10), std::chrono::milliseconds(250));
    std::unique_lock lock(mu_);
    while (!stopping_) {
        cv_.wait_for(lock, tick);
        const auto now = std::chrono::steady_clock::now();
        bool any = false;
        for (auto& [id, p] : pending_) {
            if (p.assigned_to != 0 && p.deadline <= now) {
                p.assigned_to = 0;
                ready_.push_back(id);
                ++stats_.requeued;
                any = true;
            }
        }
        if (any) cv_.notify_all();
    }
}

std::uint64_t Master::enqueue(EvalJob job, std::shared_ptr<Owner> owner)
{
    std::lock_guard lock(mu_);
    const std::uint64_t id = next_internal_++;
    Pending p;
    p.owner_job_id = job.job_id;
    job.job_id = id;
    p.job = std::move(job);
    p.owner = std::move(owner);
    pending_.emplace(id, std::move(p));
    ready_.push_back(id);
    cv_.notify_all();
    return id;
}

void Master::complete(EvalResult result)
{
    Pending p;
    {
        std::lock_guard lock(mu_);
        auto it = pending_.find(result.job_id);
        if (it == pending_.end()) {
            ++stats_.duplicates;
            return;
        }
        p = std::move(it->second);
        pending_.erase(it);
        ++stats_.results;
    }
    cv_.notify_all();
    p.owner->deliver(p.owner_job_id, std::move(result));
}

void Master::requeue_assigned(std::uint64_t conn_id)
{
    std::lock_guard lock(mu_);
    for (auto& [id, p] : pending_) {
        if (p.assigned_to == conn_id) {
            p.assigned_to = 0;
            ready_.push_back(id);
            ++stats_.requeued;
        }
    }
    cv_.notify_all();
}

void Master::drop_owner(const std::shared_ptr<Owner>& owner)
{
    std::lock_guard lock(mu_);
    std::erase_if(pending_, [&](const auto& kv) { return kv.second.owner == owner; });
}

void Master::serve_connection(std::shared_ptr<Connection> conn)
{
    {
        std::lock_guard lock(mu_);
        connections_.emplace(conn->id, conn);
    }
    net::LineReader reader(conn->sock.fd(), wire::kMaxFrame);
    try {
        if (auto line = reader.next()) {
            const auto msg = wire::decode_message(*line);
            if (const auto* hello = std::get_if<wire::Hello>(&msg)) {
                if (hello->role == wire::Role::Worker)
                    serve_worker(conn, reader);
                else
                    serve_client(conn, reader);
            }
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "master: dropping connection {}: {}\n", conn->id, e.what());
    }
    requeue_assigned(conn->id);
    conn->sock.shutdown();
    std::lock_guard lock(mu_);
    connections_.erase(conn->id);
}

void Master::serve_worker(const std::shared_ptr<Connection>& conn, net::LineReader& reader)
{
    while (auto line = reader.next()) {
        auto msg = wire::decode_message(*line);
        if (auto* res = std::get_if<wire::Result>(&msg)) {
            complete(std::move(res->result));
            continue;
        }
        if (!std::holds_alternative<wire::JobRequest>(msg)) throw wire::ProtocolError(wire::ProtocolErrc::MalformedFrame, "unexpected message from worker");

        std::optional<EvalJob> job;
        {
            std::unique_lock lock(mu_);
            while (!job) {
                cv_.wait(lock, [&] { return stopping_ || !ready_.empty(); });
                if (stopping_) break;
                const std::uint64_t id = ready_.front();
                ready_.pop_front();
                auto it = pending_.find(id);
                if (it == pending_.end() || it->second.assigned_to != 0) continue;  // resolved or already out
                it->second.assigned_to = conn->id;
                it->second.deadline = std::chrono::steady_clock::now() + options_.job_timeout;
                ++stats_.dispatched;
                job = it->second.job;
            }
        }
        if (!job) {
            conn->send(wire::Shutdown{});
            return;
        }
        conn->send(wire::Job{std::move(*job)});
    }
}

void Master::serve_client(const std::shared_ptr<Connection>& conn, net::LineReader& reader)
{
    auto owner = std::make_shared<ClientOwner>(conn);
    try {
        while (auto line = reader.next()) {
            auto msg = wire::decode_message(*line);
            if (auto* job = std::get_if<wire::Job>(&msg))
                enqueue(std::move(job->job), owner);
            else
                throw wire::ProtocolError(wire::ProtocolErrc::MalformedFrame, "clients may only send jobs");
        }
    } catch (...) {
        drop_owner(owner);
        throw;
    }
    drop_owner(owner);
}

std::vector<EvalResult> Master::run(const std::vector<EvalJob>& jobs)
{
    auto owner = std::make_shared<BatchOwner>();
    owner->slots.resize(jobs.size());
    for (const auto& j : jobs) owner->ids.push_back(j.job_id);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        EvalJob copy = jobs[i];
        copy.job_id = i;
        enqueue(std::move(copy), owner);
    }
    std::unique_lock lock(owner->mu);
    while (owner->filled < jobs.size()) {
        owner->cv.wait_for(lock, std::chrono::milliseconds(100));
        std::lock_guard g(mu_);
        if (stopping_) throw std::runtime_error("master stopped before all jobs completed");
    }
    std::vector<EvalResult> out;
    out.reserve(jobs.size());
    for (auto& s : owner->slots) out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------------------

std::vector<EvalResult> RemoteRunner::run(const std::vector<EvalJob>& jobs)
{
    std::map<std::uint64_t, std::size_t> index;
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!index.emplace(jobs[i].job_id, i).second) throw std::invalid_argument(fmt::format("duplicate job id {}", jobs[i].job_id));
    if (jobs.empty()) return {};

    net::Socket sock = net::connect_to(net::parse_address(address_));
    std::string batch = wire::encode_message(wire::Hello{wire::Role::Client, fmt::format("client-{}", ::getpid())});
    for (const auto& j : jobs) batch += wire::encode_message(wire::Job{j});
    sock.send_all(batch);

    std::vector<std::optional<EvalResult>> out(jobs.size());
    std::size_t filled = 0;
    net::LineReader reader(sock.fd(), wire::kMaxFrame);
    while (filled < jobs.size()) {
        auto line = reader.next();
        if (!line) throw net::SocketError(fmt::format("master at {} closed the connection with {} of {} results", address_, filled, jobs.size()));
        auto msg = wire::decode_message(*line);
        auto* res = std::get_if<wire::Result>(&msg);
        if (!res) {
            if (std::holds_alternative<wire::Shutdown>(msg)) throw net::SocketError("master shut down mid-batch");
            throw wire::ProtocolError(wire::ProtocolErrc::MalformedFrame, "unexpected message from master");
        }
        auto it = index.find(res->result.job_id);
        if (it == index.end()) throw wire::ProtocolError(wire::ProtocolErrc::MalformedFrame, "result for an unknown job");
        if (!out[it->second]) {
            out[it->second] = std::move(res->result);
            ++filled;
        }
    }
    std::vector<EvalResult> results;
    results.reserve(out.size());
    for (auto& r : out) results.push_back(std::move(*r));
    return results;
}

// ---------------------------------------------------------------------------

int worker_loop(const std::string& server_address, MorphologyRegistry& registry, const WorkerOptions& options)
{
    const net::Address addr = net::parse_address(server_address);
    const std::string id = options.id.empty() ? fmt::format("worker-{}", ::getpid()) : options.id;
    int attempts = 0;
    for (;;) {
        try {
            net::Socket sock = net::connect_to(addr);
            sock.send_all(wire::encode_message(wire::Hello{wire::Role::Worker, id}));
            attempts = 0;
            net::LineReader reader(sock.fd(), wire::kMaxFrame);
            for (;;) {
                sock.send_all(wire::encode_message(wire::JobRequest{}));
                auto line = reader.next();
                if (!line) throw net::SocketError("master closed the connection");
                const auto msg = wire::decode_message(*line);
                if (std::holds_alternative<wire::Shutdown>(msg)) return 0;
                const auto* job = std::get_if<wire::Job>(&msg);
                if (!job) throw wire::ProtocolError(wire::ProtocolErrc::MalformedFrame, "expected a job");
                sock.send_all(wire::encode_message(wire::Result{run_job(job->job, registry, id)}));
            }
        } catch (const std::exception& e) {
            if (++attempts > options.max_attempts) {
                fmt::print(stderr, "{}: giving up after {} reconnect attempts: {}\n", id, options.max_attempts, e.what());
                return 1;
            }
            const auto wait = options.backoff * (1LL << (attempts - 1));
            fmt::print(stderr, "{}: {}; retrying in {} ms\n", id, e.what(), wait.count());
            std::this_thread::sleep_for(wait);
        }
    }
}

}  // namespace voxevo
