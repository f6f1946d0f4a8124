// voxevo command-line front end.

#include "voxevo/distrib.hpp"
#include "voxevo/orchestrator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace voxevo;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

SimParams sim_params_from(const std::string& config_path)
{
    CampaignConfig cfg;
    if (!config_path.empty()) apply_config(cfg, ConfigDocument::load(config_path));
    cfg.sim.validate();
    return cfg.sim;
}

struct MorphFlags {
    int bench = 0;
    std::string morph;
    bool bench_set = false;
    std::uint64_t bench_seed = kDefaultBenchSeed;
};

void add_bench_seed(CLI::App* cmd, MorphFlags& m)
{
    cmd->add_option("--bench-seed", m.bench_seed, "Seed of the benchmark generator")->capture_default_str();
}

VoxelGrid single_grid(const MorphFlags& m)
{
    if (!m.morph.empty()) return load_morphology(m.morph);
    if (m.bench) return generate_benchmark(m.bench, m.bench_seed);
    throw UsageError("one of --bench or --morph is required");
}

// ---------------------------------------------------------------------------

struct EvolveFlags {
    std::vector<std::string> algos;
    MorphFlags morph;
    std::vector<int> holdout;
    std::size_t gens = 0, pop = 0, trials = 0, jobs = 0;
    std::uint64_t seed = 0;
    std::string out, config, server;
    bool verbose = false;
};

void add_evolve_options(CLI::App* cmd, EvolveFlags& f, bool robustness)
{
    cmd->add_option("--algo", f.algos, "Algorithm(s): sga, neat, hyperneat")
        ->delimiter(',')
        ->check(CLI::IsMember({"sga", "neat", "hyperneat"}));
    if (!robustness) {
        auto* b = cmd->add_option("--bench", f.morph.bench, "Benchmark morphology index")->check(CLI::Range(1, 9));
        auto* m = cmd->add_option("--morph", f.morph.morph, "Morphology file")->check(CLI::ExistingFile);
        auto* s = cmd->add_flag("--bench-set", f.morph.bench_set, "Evolve against all nine benchmarks");
        b->excludes(m)->excludes(s);
        m->excludes(s);
    }
    cmd->add_option("--holdout", f.holdout, "Benchmarks excluded from training (bench-set mode)")->delimiter(',')->check(CLI::Range(1, 9));
    add_bench_seed(cmd, f.morph);
    cmd->add_option("--gens", f.gens, "Generations")->check(CLI::PositiveNumber);
    cmd->add_option("--pop", f.pop, "Population size")->check(CLI::Range(2, 1000000));
    cmd->add_option("--trials", f.trials, "Independent trials")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Base seed; trial i uses seed + i");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--config", f.config, "Experiment config file")->check(CLI::ExistingFile);
    cmd->add_option("--jobs", f.jobs, "Local evaluation threads")->check(CLI::PositiveNumber);
    auto* server = cmd->add_option("--server", f.server, "Evaluate through a master at ADDR");
    cmd->get_option("--jobs")->excludes(server);
    cmd->add_flag("--verbose", f.verbose, "Log every generation");
}

CampaignConfig campaign_from(const EvolveFlags& f, bool robustness)
{
    CampaignConfig cfg;
    if (!f.config.empty()) apply_config(cfg, ConfigDocument::load(f.config));
    if (!f.algos.empty()) {
        cfg.algorithms.clear();
        for (const auto& a : f.algos) cfg.algorithms.push_back(*algorithm_from_name(a));
    }
    if (robustness || f.morph.bench_set)
        cfg.morphology.kind = MorphologySource::Kind::BenchSet;
    else if (!f.morph.morph.empty())
        cfg.morphology = parse_morphology_source(f.morph.morph);
    else if (f.morph.bench)
        cfg.morphology = {MorphologySource::Kind::Bench, f.morph.bench, {}};
    cfg.bench_seed = f.morph.bench_seed;
    if (!f.holdout.empty()) cfg.holdout = f.holdout;
    if (f.gens) cfg.neat.generations = cfg.sga.generations = f.gens;
    if (f.pop) cfg.neat.pop_size = cfg.sga.pop_size = f.pop;
    if (f.trials) cfg.trials = f.trials;
    cfg.base_seed = f.seed;
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.jobs) cfg.jobs = f.jobs;
    if (!f.server.empty()) cfg.server = f.server;
    if (f.verbose) cfg.verbose = true;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

int run_evolve(const EvolveFlags& f, bool robustness)
{
    const CampaignConfig cfg = campaign_from(f, robustness);
    const auto result = run_campaign(cfg);
    for (const auto& [algo, trials] : result.trials) {
        for (const auto& t : trials) {
            std::string line = fmt::format("{} trial {} seed {}: champion fitness {:.9g}", algorithm_name(algo), t.trial, t.seed, t.champion_fitness);
            if (t.complexity) line += fmt::format(" (hidden {}, connections {})", t.complexity->hidden_nodes, t.complexity->connections);
            if (t.holdout_aptitude) line += fmt::format(" holdout aptitude {:.9g}", *t.holdout_aptitude);
            fmt::print("{}\n", line);
        }
    }
    fmt::print("results written to {}\n", cfg.out_dir);
    return 0;
}

int run_robustness_eval(const std::string& controller_path, const MorphFlags& m, const std::string& config_path)
{
    const SimParams params = sim_params_from(config_path);
    const Controller c = load_controller(controller_path);
    std::vector<VoxelGrid> grids;
    for (int k = 1; k <= 9; ++k) grids.push_back(generate_benchmark(k, m.bench_seed));
    std::vector<double> d;
    for (const auto& g : grids) {
        d.push_back(evaluate_controller(c, g, params));
        fmt::print("{} {:.17g}\n", g.id(), d.back());
    }
    fmt::print("aptitude {:.17g}\n", aptitude(d));
    return 0;
}

// ---------------------------------------------------------------------------

int run_simulate(const MorphFlags& m, const std::string& phases, const std::string& controller, const std::string& out,
                 const std::string& config_path)
{
    const SimParams params = sim_params_from(config_path);
    const VoxelGrid grid = single_grid(m);
    PhaseField field;
    if (!phases.empty()) {
        std::ifstream in(phases);
        if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", phases));
        field = read_phase_csv(in, grid.dims());
    } else {
        field = load_controller(controller).phase_field(grid);
    }
    const TipTrace trace = simulate(grid, field, params);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", out));
    write_trace_csv(f, trace);
    f.close();
    fmt::print("displacement {:.9g}\n", fitness_displacement(trace, params));
    return 0;
}

int run_report(const std::string& path, const std::string& config_path)
{
    const std::string text = read_file(path);
    if (text.starts_with("t,x,y,z")) {
        const SimParams params = sim_params_from(config_path);
        std::istringstream in(text);
        const TipTrace trace = read_trace_csv(in);
        fmt::print("samples {}\n", trace.samples.size());
        fmt::print("duration {:.9g}\n", trace.samples.back().t);
        fmt::print("displacement {:.9g}\n", fitness_displacement(trace, params));
        return 0;
    }
    const Controller c = text.starts_with("controller") ? parse_controller(text) : Controller::neat(parse_genome(text));
    fmt::print("kind {}\n", controller_kind_name(c.kind));
    if (c.fitness()) fmt::print("fitness {:.17g}\n", *c.fitness());
    if (c.kind != ControllerKind::SgaMatrix) {
        const auto cx = complexity_report(c);
        fmt::print("hidden_nodes {}\nconnections {}\n", cx.hidden_nodes, cx.connections);
    } else {
        fmt::print("dims {} {} {}\n", c.matrix.dims.nx, c.matrix.dims.ny, c.matrix.dims.nz);
    }
    return 0;
}

int run_serve(const std::string& bind, double timeout_s)
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);  // inherited by the master's threads

    MasterOptions opts;
    opts.job_timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
    Master master(bind, opts);
    fmt::print("listening on port {}\n", master.port());
    std::fflush(stdout);
    int sig = 0;
    sigwait(&set, &sig);
    master.stop();
    const auto s = master.stats();
    fmt::print("stopped: {} results, {} requeued, {} duplicates discarded\n", s.results, s.requeued, s.duplicates);
    return 0;
}

int run_worker(const std::string& server, const std::string& id, const std::vector<std::string>& morphs, int attempts)
{
    MorphologyRegistry registry;
    for (const auto& path : morphs) {
        const VoxelGrid g = load_morphology(path);
        registry.add(g);
        fmt::print(stderr, "registered {} as {}\n", path, g.id());
    }
    WorkerOptions opts;
    opts.id = id;
    opts.max_attempts = attempts;
    return worker_loop(server, registry, opts);
}

int run_genbench(int index, std::uint64_t seed, const std::string& out)
{
    if (index) {
        const VoxelGrid g = generate_benchmark(index, seed);
        if (out.empty())
            fmt::print("{}", render_morphology(g));
        else
            save_morphology(g, out);
        return 0;
    }
    if (out.empty()) throw UsageError("--out DIR is required when generating all benchmarks");
    fs::create_directories(out);
    for (int k = 1; k <= 9; ++k) save_morphology(generate_benchmark(k, seed), (fs::path(out) / fmt::format("bha-{}.txt", k)).string());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Neuroevolution workbench for voxel biohybrid actuator controllers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "voxevo 0.1.0");

    EvolveFlags evolve_flags;
    auto* evolve = app.add_subcommand("evolve", "Run evolutionary trials");
    add_evolve_options(evolve, evolve_flags, false);
    evolve->get_option("--seed")->required();

    EvolveFlags robust_flags;
    std::string robust_controller;
    auto* robust = app.add_subcommand("robustness", "Evolve against, or score on, the nine-benchmark set");
    add_evolve_options(robust, robust_flags, true);
    auto* robust_seed = robust->get_option("--seed");
    robust->add_option("--controller", robust_controller, "Score a stored controller instead of evolving")->check(CLI::ExistingFile);

    MorphFlags sim_morph;
    std::string sim_phases, sim_controller, sim_out, sim_config;
    auto* sim = app.add_subcommand("simulate", "Simulate one morphology and write the tip trace");
    auto* sb = sim->add_option("--bench", sim_morph.bench, "Benchmark morphology index")->check(CLI::Range(1, 9));
    auto* sm = sim->add_option("--morph", sim_morph.morph, "Morphology file")->check(CLI::ExistingFile);
    sb->excludes(sm);
    add_bench_seed(sim, sim_morph);
    auto* sp = sim->add_option("--phases", sim_phases, "Phase CSV, one value per voxel, x fastest")->check(CLI::ExistingFile);
    auto* sc = sim->add_option("--controller", sim_controller, "Controller file")->check(CLI::ExistingFile);
    sp->excludes(sc);
    sim->add_option("--out", sim_out, "Trace CSV to write")->required();
    sim->add_option("--config", sim_config, "Config file with [sim] overrides")->check(CLI::ExistingFile);

    std::string report_path, report_config;
    auto* report = app.add_subcommand("report", "Summarize a trace CSV or a controller file");
    report->add_option("file", report_path, "Trace CSV or controller/genome file")->required()->check(CLI::ExistingFile);
    report->add_option("--config", report_config, "Config file with [sim] overrides")->check(CLI::ExistingFile);

    std::string bind = default_bind_address();
    double job_timeout = 60.0;
    auto* serve = app.add_subcommand("serve", "Run the job broker for remote workers");
    serve->add_option("--bind", bind, "Bind address host:port (default from VOXEVO_BIND)")->capture_default_str();
    serve->add_option("--job-timeout", job_timeout, "Seconds before an unanswered job is re-queued")->check(CLI::PositiveNumber)->capture_default_str();

    std::string worker_server, worker_id;
    std::vector<std::string> worker_morphs;
    int worker_attempts = 5;
    auto* worker = app.add_subcommand("worker", "Pull and evaluate jobs from a master");
    worker->add_option("--server", worker_server, "Master address host:port")->required();
    worker->add_option("--id", worker_id, "Worker name used in results");
    worker->add_option("--morph", worker_morphs, "Morphology files to register")->check(CLI::ExistingFile);
    worker->add_option("--attempts", worker_attempts, "Reconnect attempts before exiting")->check(CLI::NonNegativeNumber)->capture_default_str();

    int gen_index = 0;
    std::uint64_t gen_seed = kDefaultBenchSeed;
    std::string gen_out;
    auto* genbench = app.add_subcommand("genbench", "Write benchmark morphologies");
    genbench->add_option("--index", gen_index, "Benchmark index; omit for all nine")->check(CLI::Range(1, 9));
    genbench->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
    genbench->add_option("--out", gen_out, "Output file (or directory for all nine)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*evolve) {
            if (!evolve_flags.morph.bench && evolve_flags.morph.morph.empty() && !evolve_flags.morph.bench_set && evolve_flags.config.empty())
                throw UsageError("evolve needs --bench, --morph, --bench-set or --config");
            return run_evolve(evolve_flags, false);
        }
        if (*robust) {
            if (!robust_controller.empty()) return run_robustness_eval(robust_controller, robust_flags.morph, robust_flags.config);
            if (robust_seed->count() == 0) throw UsageError("--seed is required when evolving");
            return run_evolve(robust_flags, true);
        }
        if (*sim) {
            if (sim_phases.empty() && sim_controller.empty()) throw UsageError("simulate needs --phases or --controller");
            return run_simulate(sim_morph, sim_phases, sim_controller, sim_out, sim_config);
        }
        if (*report) return run_report(report_path, report_config);
        if (*serve) return run_serve(bind, job_timeout);
        if (*worker) return run_worker(worker_server, worker_id, worker_morphs, worker_attempts);
        if (*genbench) return run_genbench(gen_index, gen_seed, gen_out);
    } catch (const UsageError& e) {
        fmt::print(stderr, "usage error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
