#pragma once

#include "voxevo/controller.hpp"
#include "voxevo/morphology.hpp"
#include "voxevo/physics.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace voxevo {

/// Fitness assigned when a simulation diverges.
inline constexpr double kDivergencePenalty = -1000.0;

/// Phase query plus simulation; divergence maps to the penalty sentinel.
double evaluate_controller(const Controller& c, const VoxelGrid& grid, const SimParams& params);
double evaluate_field(const VoxelGrid& grid, const PhaseField& field, const SimParams& params);

/// Unweighted mean of the per-grid displacements.
double evaluate_robustness(const Controller& c, std::span<const VoxelGrid> grids, const SimParams& params);
double aptitude(std::span<const double> displacements);

struct ComplexityReport {
    std::size_t hidden_nodes = 0;
    std::size_t connections = 0;
    friend bool operator==(const ComplexityReport&, const ComplexityReport&) = default;
};

/// Throws std::invalid_argument for matrix controllers, which have no topology.
ComplexityReport complexity_report(const Controller& c);

/// Thread-safe id -> morphology map. Benchmark ids (`bha-k`, `bha-k:seed`)
/// resolve on demand; file morphologies must be added explicitly.
class MorphologyRegistry {
public:
    void add(const VoxelGrid& grid);
    std::shared_ptr<const VoxelGrid> find(const std::string& id);

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const VoxelGrid>> grids_;
};

/// Parses `bha-k` / `bha-k:seed`; nullopt for anything else.
std::optional<std::pair<int, std::uint64_t>> parse_benchmark_id(std::string_view id);

enum class EvalStatus { Ok, Diverged, Error };
std::string_view eval_status_name(EvalStatus s) noexcept;
std::optional<EvalStatus> eval_status_from_name(std::string_view s) noexcept;

struct EvalJob {
    std::uint64_t job_id = 0;
    std::string morphology_id;
    std::string controller;  ///< serialized controller text
    SimParams sim_params;

    friend bool operator==(const EvalJob&, const EvalJob&) = default;
};

struct EvalResult {
    std::uint64_t job_id = 0;
    double displacement = 0.0;
    EvalStatus status = EvalStatus::Ok;
    std::string message;
    std::string worker_id;
    double elapsed_ms = 0.0;

    friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

/// Runs one job. Never throws: failures come back as Error results.
EvalResult run_job(const EvalJob& job, MorphologyRegistry& registry, const std::string& worker_id);

/// Executes a batch of jobs, returning results in job order.
class JobRunner {
public:
    virtual ~JobRunner() = default;
    virtual std::vector<EvalResult> run(const std::vector<EvalJob>& jobs) = 0;
};

/// In-process backend with an optional thread pool.
class LocalRunner final : public JobRunner {
public:
    LocalRunner(std::shared_ptr<MorphologyRegistry> registry, std::size_t threads = 1);
    std::vector<EvalResult> run(const std::vector<EvalJob>& jobs) override;

private:
    std::shared_ptr<MorphologyRegistry> registry_;
    std::size_t threads_;
};

}  // namespace voxevo
