#pragma once

#include "voxevo/evaluation.hpp"
#include "voxevo/socket.hpp"
#include "voxevo/wire.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace voxevo {

/// Default bind address, overridable through VOXEVO_BIND.
std::string default_bind_address();

struct MasterOptions {
    std::chrono::milliseconds job_timeout{60000};
};

struct MasterStats {
    std::uint64_t dispatched = 0;
    std::uint64_t requeued = 0;
    std::uint64_t results = 0;
    std::uint64_t duplicates = 0;
};

/// Job broker. Clients (or in-process callers of run()) submit jobs; workers
/// pull them one at a time. Jobs held by a worker that disconnects or
/// exceeds the timeout go back to the queue; the first result per job wins.
class Master {
public:
    explicit Master(const std::string& bind_address, MasterOptions options = {});
    ~Master();
    Master(const Master&) = delete;
    Master& operator=(const Master&) = delete;

    std::uint16_t port() const noexcept { return listener_.port(); }

    /// Sends shutdown to connected workers and joins every thread.
    void stop();

    /// Submits jobs in-process and blocks until each has one result. Results
    /// come back in job order.
    std::vector<EvalResult> run(const std::vector<EvalJob>& jobs);

    MasterStats stats() const;
    std::size_t worker_count() const;

private:
    struct Connection;
    struct Owner;
    struct ClientOwner;
    struct BatchOwner;
    struct Handler {
        std::shared_ptr<std::atomic<bool>> done;
        std::thread thread;
    };
    struct Pending {
        EvalJob job;  // job_id rewritten to the internal id
        std::uint64_t owner_job_id = 0;
        std::shared_ptr<Owner> owner;
        std::uint64_t assigned_to = 0;  // connection id, 0 when queued
        std::chrono::steady_clock::time_point deadline{};
    };

    void accept_loop();
    void reap_loop();
    void serve_connection(std::shared_ptr<Connection> conn);
    void serve_worker(const std::shared_ptr<Connection>& conn, net::LineReader& reader);
    void serve_client(const std::shared_ptr<Connection>& conn, net::LineReader& reader);
    std::uint64_t enqueue(EvalJob job, std::shared_ptr<Owner> owner);
    void complete(EvalResult result);
    void requeue_assigned(std::uint64_t conn_id);
    void drop_owner(const std::shared_ptr<Owner>& owner);

    MasterOptions options_;
    net::Listener listener_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    bool stopping_ = false;
    std::deque<std::uint64_t> ready_;
    std::map<std::uint64_t, Pending> pending_;
    std::map<std::uint64_t, std::shared_ptr<Connection>> connections_;
    std::uint64_t next_internal_ = 1;
    std::uint64_t next_conn_ = 1;
    MasterStats stats_;
    std::thread acceptor_;
    std::thread reaper_;
    std::vector<Handler> handlers_;
};

/// Backend that forwards jobs to a master as a client.
class RemoteRunner final : public JobRunner {
public:
    explicit RemoteRunner(std::string address) : address_(std::move(address)) {}
    std::vector<EvalResult> run(const std::vector<EvalJob>& jobs) override;

private:
    std::string address_;
};

struct WorkerOptions {
    std::string id;
    int max_attempts = 5;
    std::chrono::milliseconds backoff{200};
};

/// Pulls and evaluates jobs until the master sends shutdown (returns 0) or
/// reconnection attempts are exhausted (returns 1).
int worker_loop(const std::string& server_address, MorphologyRegistry& registry, const WorkerOptions& options);

}  // namespace voxevo
