#include "voxevo/evaluation.hpp"

#include <fmt/format.h>

#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <stdexcept>
#include <thread>

namespace voxevo {

double evaluate_field(const VoxelGrid& grid, const PhaseField& field, const SimParams& params)
{
    try {
        return fitness_displacement(simulate(grid, field, params), params);
    } catch (const NumericalDivergence& e) {
        fmt::print(stderr, "warning: simulation of '{}' diverged ({}); scoring {}\n", grid.id(), e.what(), kDivergencePenalty);
        return kDivergencePenalty;
    }
}

double evaluate_controller(const Controller& c, const VoxelGrid& grid, const SimParams& params)
{
    return evaluate_field(grid, c.phase_field(grid), params);
}

double aptitude(std::span<const double> displacements)
{
    if (displacements.empty()) throw std::invalid_argument("aptitude of an empty morphology set");
    double sum = 0.0;
    for (const double d : displacements) sum += d;
    return sum / static_cast<double>(displacements.size());
}

double evaluate_robustness(const Controller& c, std::span<const VoxelGrid> grids, const SimParams& params)
{
    std::vector<double> d;
    d.reserve(grids.size());
    for (const auto& g : grids) d.push_back(evaluate_controller(c, g, params));
    return aptitude(d);
}

ComplexityReport complexity_report(const Controller& c)
{
    switch (c.kind) {
    case ControllerKind::NeatCppn: return {c.cppn.hidden_count(), c.cppn.enabled_conn_count()};
    case ControllerKind::HyperneatNet: {
        const auto net = paint_weights(c.cppn, build_substrate(c.substrate));
        return {net.active_hidden_count(), net.connection_count()};
    }
    case ControllerKind::SgaMatrix: break;
    }
    throw std::invalid_argument("unsupported-kind: matrix controllers have no network complexity");
}

// ---------------------------------------------------------------------------

std::optional<std::pair<int, std::uint64_t>> parse_benchmark_id(std::string_view id)
{
    if (!id.starts_with("bha-")) return std::nullopt;
    id.remove_prefix(4);
    const auto colon = id.find(':');
    const std::string_view idx_part = id.substr(0, colon);
    int index = 0;
    auto [p, ec] = std::from_chars(idx_part.data(), idx_part.data() + idx_part.size(), index);
    if (ec != std::errc{} || p != idx_part.data() + idx_part.size() || index < 1 || index > 9) return std::nullopt;
    std::uint64_t seed = kDefaultBenchSeed;
    if (colon != std::string_view::npos) {
        const std::string_view s = id.substr(colon + 1);
        auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), seed);
        if (ec2 != std::errc{} || q != s.data() + s.size() || s.empty()) return std::nullopt;
    }
    return std::make_pair(index, seed);
}

void MorphologyRegistry::add(const VoxelGrid& grid)
{
    if (grid.id().empty()) throw std::invalid_argument("registered morphologies need an id");
    std::lock_guard lock(mu_);
    grids_[grid.id()] = std::make_shared<const VoxelGrid>(grid);
}

std::shared_ptr<const VoxelGrid> MorphologyRegistry::find(const std::string& id)
{
    std::lock_guard lock(mu_);
    if (auto it = grids_.find(id); it != grids_.end()) return it->second;
    if (auto bench = parse_benchmark_id(id)) {
        auto grid = std::make_shared<const VoxelGrid>(generate_benchmark(bench->first, bench->second).with_id(id));
        grids_.emplace(id, grid);
        return grid;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 3> kStatusNames{"ok", "diverged", "error"};

}  // namespace

std::string_view eval_status_name(EvalStatus s) noexcept { return kStatusNames[static_cast<std::size_t>(s)]; }

std::optional<EvalStatus> eval_status_from_name(std::string_view s) noexcept
{
    for (std::size_t i = 0; i < kStatusNames.size(); ++i)
        if (kStatusNames[i] == s) return static_cast<EvalStatus>(i);
    return std::nullopt;
}

EvalResult run_job(const EvalJob& job, MorphologyRegistry& registry, const std::string& worker_id)
{
    const auto start = std::chrono::steady_clock::now();
    EvalResult r;
    r.job_id = job.job_id;
    r.worker_id = worker_id;
    try {
        const auto grid = registry.find(job.morphology_id);
        if (!grid) throw std::runtime_error(fmt::format("unknown morphology '{}'", job.morphology_id));
        job.sim_params.validate();
        const Controller c = parse_controller(job.controller);
        try {
            r.displacement = fitness_displacement(simulate(*grid, c.phase_field(*grid), job.sim_params), job.sim_params);
        } catch (const NumericalDivergence& e) {
            r.status = EvalStatus::Diverged;
            r.displacement = kDivergencePenalty;
            r.message = e.what();
        }
    } catch (const std::exception& e) {
        r.status = EvalStatus::Error;
        r.displacement = 0.0;
        r.message = e.what();
    }
    r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

LocalRunner::LocalRunner(std::shared_ptr<MorphologyRegistry> registry, std::size_t threads)
    : registry_(std::move(registry)), threads_(std::max<std::size_t>(threads, 1))
{
    if (!registry_) throw std::invalid_argument("LocalRunner needs a registry");
}

std::vector<EvalResult> LocalRunner::run(const std::vector<EvalJob>& jobs)
{
    std::vector<EvalResult> out(jobs.size());
    const std::size_t n_threads = std::min(threads_, jobs.size());
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) out[i] = run_job(jobs[i], *registry_, "local");
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            const std::string id = fmt::format("local-{}", t);
            for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = run_job(jobs[i], *registry_, id);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace voxevo
