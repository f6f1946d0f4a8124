// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Pass criterion numbers as arguments to run
// a subset. Long experiment outputs land in ./acceptance_runs.

#include "voxevo/controller.hpp"
#include "voxevo/distrib.hpp"
#include "voxevo/evaluation.hpp"
#include "voxevo/neat.hpp"
#include "voxevo/orchestrator.hpp"
#include "voxevo/physics.hpp"

#include <fmt/core.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <cmath>
#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

using namespace voxevo;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const fs::path kRunDir = fs::absolute("acceptance_runs");

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int shell(const std::string& cmd)
{
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

PhaseField random_field(const VoxelGrid& g, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-kMaxPhase, kMaxPhase);
    PhaseField f(g.dims());
    for (std::size_t i = 0; i < g.dims().volume(); ++i)
        if (g.at(i) != Material::Empty) f.set(i, u(rng));
    return f;
}

std::vector<VoxelGrid> benchmarks()
{
    std::vector<VoxelGrid> out;
    for (int k = 1; k <= 9; ++k) out.push_back(generate_benchmark(k, kDefaultBenchSeed));
    return out;
}

// 1: the invariant fuzz suites of the unit binary, timed.
Outcome invariants()
{
    const auto t0 = Clock::now();
    const int rc = shell(std::string(VOXEVO_UNIT_PATH) + " --test-suite=cppn,neat,sga,hyperneat");
    const double s = seconds_since(t0);
    return {rc == 0 && s < 120, fmt::format("fuzz suites exit {} in {:.1f} s (limit 120 s)", rc, s)};
}

// 2: null actuation, mirror symmetry, plane constraint, stability.
Outcome physics_properties()
{
    const auto t0 = Clock::now();
    const auto grids = benchmarks();
    double worst_null = 0, worst_mirror = 0, worst_plane = 0;
    std::size_t diverged = 0;

    SimParams still;
    still.actuation_amp = 0;
    for (std::size_t k = 0; k < grids.size(); ++k)
        worst_null = std::max(worst_null, std::abs(fitness_displacement(simulate(grids[k], random_field(grids[k], k), still), still)));

    const SimParams p;
    for (std::size_t k = 0; k < grids.size(); ++k) {
        const auto f = random_field(grids[k], 100 + k);
        const auto a = simulate(grids[k], f, p);
        const auto b = simulate(mirror_y(grids[k]), mirror_y(f), p);
        const double yc = grids[k].dims().ny * p.voxel_len / 2;
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            worst_mirror = std::max(worst_mirror, std::abs(a.samples[i].z - b.samples[i].z));
            worst_mirror = std::max(worst_mirror, std::abs((a.samples[i].y - yc) + (b.samples[i].y - yc)));
        }
        try {
            if (!std::isfinite(fitness_displacement(a, p))) ++diverged;
        } catch (const NumericalDivergence&) {
            ++diverged;
        }
    }

    const Lattice lat(grids[0], p);
    const auto rest = lat.rest_state();
    auto s = rest;
    const PhaseField f = random_field(grids[0], 7);
    const double dt = 0.1 * std::sqrt(p.mass / p.stiffness);
    for (int i = 0; i < 2000; ++i) lat.step(s, i * dt, dt, f);
    for (std::uint32_t m = 0; m < lat.mass_count(); ++m)
        worst_plane = std::max(worst_plane, std::abs(lat.position(s, m).x - lat.position(rest, m).x));

    const double secs = seconds_since(t0);
    const bool ok = worst_null <= 1e-9 && worst_mirror <= 1e-6 && worst_plane == 0 && diverged == 0 && secs < 60;
    return {ok, fmt::format("null {:.2e} (<=1e-9), mirror {:.2e} (<=1e-6), plane {:.1e} (==0), diverged {}/9, {:.1f} s",
                            worst_null, worst_mirror, worst_plane, diverged, secs)};
}

// 3: byte-identical reruns through the CLI and exact champion re-evaluation.
Outcome determinism()
{
    std::vector<std::string> notes;
    bool ok = true;
    const SimParams sim;
    const auto grid = generate_benchmark(1, kDefaultBenchSeed);
    for (const char* algo : {"sga", "neat", "hyperneat"}) {
        const auto a = kRunDir / "c3" / algo / "a";
        const auto b = kRunDir / "c3" / algo / "b";
        fs::remove_all(a);
        fs::remove_all(b);
        const std::string base = fmt::format("{} evolve --algo {} --bench 1 --gens 6 --pop 10 --trials 2 --seed 17 --out ", VOXEVO_CLI_PATH, algo);
        if (shell(base + a.string()) != 0 || shell(base + b.string()) != 0) {
            ok = false;
            notes.push_back(fmt::format("{}: evolve failed", algo));
            continue;
        }
        std::size_t compared = 0, differing = 0;
        for (const auto& e : fs::directory_iterator(a)) {
            const auto name = e.path().filename().string();
            if (name == "timing.csv") continue;
            ++compared;
            if (slurp(e.path()) != slurp(b / name)) ++differing;
        }
        std::ifstream summary(a / "summary.csv");
        std::string line;
        std::getline(summary, line);
        std::size_t exact = 0, trials = 0;
        while (std::getline(summary, line)) {
            std::stringstream ss(line);
            std::string trial, seed, fit;
            std::getline(ss, trial, ',');
            std::getline(ss, seed, ',');
            std::getline(ss, fit, ',');
            const auto champ = load_controller((a / ("champion_" + trial + ".genome")).string());
            ++trials;
            if (evaluate_controller(champ, grid, sim) == std::stod(fit) && champ.fitness() == std::stod(fit)) ++exact;
        }
        ok = ok && differing == 0 && compared >= 6 && trials == 2 && exact == trials;
        notes.push_back(fmt::format("{}: {} files identical of {}, {}/{} champions exact", algo, compared - differing, compared, exact, trials));
    }
    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    return {ok, detail};
}

// 4: generation zero is the minimal fully connected topology.
Outcome minimal_start()
{
    NeatConfig cfg;
    std::size_t bad = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        InnovationTracker tracker;
        for (const auto& g : init_population(cfg, IoSpec{4, 1}, rng, tracker)) {
            ++total;
            if (complexity_report(Controller::neat(g)) != ComplexityReport{0, 4}) ++bad;
        }
    }
    return {bad == 0, fmt::format("{} of {} generation-0 genomes report (0, 4)", total - bad, total)};
}

// 5: aptitude equals the direct nine-term mean.
Outcome aptitude_exactness()
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    double worst = 0;
    for (int t = 0; t < 100000; ++t) {
        std::array<double, 9> d{};
        for (auto& v : d) v = u(rng);
        const double direct = (d[0] + d[1] + d[2] + d[3] + d[4] + d[5] + d[6] + d[7] + d[8]) / 9.0;
        worst = std::max(worst, std::abs(aptitude(d) - direct));
    }
    const auto grids = benchmarks();
    auto g = make_minimal_genome(4, 1, 0.7);
    g.nodes.back().activation = Activation::Sine;
    const auto c = Controller::neat(g);
    double direct = 0;
    for (const auto& grid : grids) direct += evaluate_controller(c, grid, {});
    direct /= 9.0;
    const double on_grids = std::abs(evaluate_robustness(c, grids, {}) - direct);
    return {worst <= 1e-12 && on_grids <= 1e-12,
            fmt::format("max |aptitude - direct| {:.2e} over 1e5 vectors, {:.2e} on the nine benchmarks (<=1e-12)", worst, on_grids)};
}

CampaignConfig scaled_campaign(std::string_view morphology, const fs::path& out)
{
    CampaignConfig cfg;
    cfg.algorithms = {Algorithm::Sga, Algorithm::Neat, Algorithm::Hyperneat};
    cfg.morphology = parse_morphology_source(morphology);
    cfg.trials = 5;
    cfg.base_seed = 1;
    cfg.out_dir = out.string();
    cfg.neat.pop_size = cfg.sga.pop_size = 20;
    cfg.neat.generations = cfg.sga.generations = 60;
    return cfg;
}

std::map<Algorithm, double> mean_champion(const CampaignResult& r)
{
    std::map<Algorithm, double> m;
    for (const auto& [algo, trials] : r.trials) {
        double s = 0;
        for (const auto& t : trials) s += t.champion_fitness;
        m[algo] = s / static_cast<double>(trials.size());
    }
    return m;
}

std::optional<CampaignResult> single_bench_runs;

const CampaignResult& single_bench()
{
    if (!single_bench_runs) {
        fs::remove_all(kRunDir / "c6");
        single_bench_runs = run_campaign(scaled_campaign("bench:1", kRunDir / "c6"));
    }
    return *single_bench_runs;
}

// 6: desk-scale comparison on benchmark 1.
Outcome comparative()
{
    const auto t0 = Clock::now();
    const auto m = mean_champion(single_bench());
    const double sga = m.at(Algorithm::Sga), neat = m.at(Algorithm::Neat), hyper = m.at(Algorithm::Hyperneat);
    const double margin = 0.1 * std::abs(sga);
    const bool ok = neat >= sga && hyper >= sga && neat - sga >= margin;
    return {ok, fmt::format("mean champion SGA {:.5f}, NEAT {:.5f}, HyperNEAT {:.5f}; NEAT-SGA {:.5f} vs margin {:.5f}; {:.0f} s",
                            sga, neat, hyper, neat - sga, margin, seconds_since(t0))};
}

// 7: same budget trained on the nine-benchmark set.
Outcome robustness_ranking()
{
    const auto t0 = Clock::now();
    fs::remove_all(kRunDir / "c7");
    const auto m = mean_champion(run_campaign(scaled_campaign("bench-set", kRunDir / "c7")));
    const double sga = m.at(Algorithm::Sga), neat = m.at(Algorithm::Neat), hyper = m.at(Algorithm::Hyperneat);
    return {neat >= sga && hyper >= sga, fmt::format("mean aptitude SGA {:.5f}, NEAT {:.5f}, HyperNEAT {:.5f}; {:.0f} s", sga, neat, hyper,
                                                     seconds_since(t0))};
}

// 8: champion size in the runs of criterion 6.
Outcome complexity_direction()
{
    const auto& r = single_bench();
    auto mean_conn = [&](Algorithm a) {
        double s = 0, h = 0;
        for (const auto& t : r.trials.at(a)) s += t.complexity->connections, h += t.complexity->hidden_nodes;
        const double n = static_cast<double>(r.trials.at(a).size());
        return std::pair{h / n, s / n};
    };
    const auto [nh, nc] = mean_conn(Algorithm::Neat);
    const auto [hh, hc] = mean_conn(Algorithm::Hyperneat);
    return {nc < hc, fmt::format("NEAT champions {:.1f} hidden / {:.1f} connections, HyperNEAT {:.1f} / {:.1f}", nh, nc, hh, hc)};
}

pid_t spawn_worker(std::uint16_t port, const std::string& id)
{
    const pid_t pid = ::fork();
    if (pid == 0) {
        const std::string server = fmt::format("127.0.0.1:{}", port);
        const int devnull = ::open("/dev/null", O_WRONLY);
        ::dup2(devnull, 2);
        ::execl(VOXEVO_CLI_PATH, VOXEVO_CLI_PATH, "worker", "--server", server.c_str(), "--id", id.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    return pid;
}

std::vector<EvalJob> distribution_jobs()
{
    std::vector<EvalJob> jobs;
    std::mt19937_64 rng(99);
    NeatConfig cfg;
    InnovationTracker tracker;
    auto pop = init_population(cfg, IoSpec{4, 1}, rng, tracker);
    for (std::size_t i = 0; i < 50; ++i) {
        auto g = pop[i % pop.size()];
        for (int k = 0; k < 3; ++k) mutate(g, cfg, rng, tracker);
        jobs.push_back({1000 + i, benchmark_id(static_cast<int>(1 + i % 9)), serialize_controller(Controller::neat(g)), SimParams{}});
    }
    return jobs;
}

std::map<std::uint64_t, double> as_map(const std::vector<EvalResult>& rs, bool& all_ok)
{
    std::map<std::uint64_t, double> m;
    for (const auto& r : rs) {
        if (r.status != EvalStatus::Ok || m.count(r.job_id)) all_ok = false;
        m[r.job_id] = r.displacement;
    }
    return m;
}

std::map<std::uint64_t, double> remote_run(const std::vector<EvalJob>& jobs, int workers, bool kill_one, bool& all_ok, std::size_t& requeued)
{
    Master master("127.0.0.1:0");
    std::vector<pid_t> pids;
    for (int w = 0; w < workers; ++w) pids.push_back(spawn_worker(master.port(), fmt::format("w{}", w)));
    std::vector<EvalResult> results;
    std::thread client([&] { results = RemoteRunner(fmt::format("127.0.0.1:{}", master.port())).run(jobs); });
    if (kill_one) {
        while (master.stats().results < 10) std::this_thread::sleep_for(std::chrono::milliseconds(2));
        ::kill(pids.front(), SIGKILL);
    }
    client.join();
    requeued = master.stats().requeued;
    master.stop();
    for (pid_t p : pids) ::waitpid(p, nullptr, 0);
    if (results.size() != jobs.size()) all_ok = false;
    return as_map(results, all_ok);
}

// 9: local, one remote worker and four remote workers agree; a killed worker is survived.
Outcome distribution()
{
    const auto jobs = distribution_jobs();
    bool ok = true;
    std::size_t rq1 = 0, rq4 = 0, rqk = 0;
    const auto local = as_map(LocalRunner(std::make_shared<MorphologyRegistry>()).run(jobs), ok);
    const auto one = remote_run(jobs, 1, false, ok, rq1);
    const auto four = remote_run(jobs, 4, false, ok, rq4);
    const auto killed = remote_run(jobs, 3, true, ok, rqk);
    const bool same = local == one && local == four && local == killed && local.size() == 50;
    return {ok && same && rqk >= 1,
            fmt::format("{} jobs; local == 1 worker: {}, == 4 workers: {}, == after SIGKILL: {} ({} requeued); one ok result per job: {}",
                        local.size(), local == one, local == four, local == killed, rqk, ok)};
}

}  // namespace

int main(int argc, char** argv)
{
    std::signal(SIGPIPE, SIG_IGN);
    fs::create_directories(kRunDir);
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, invariants},  {2, physics_properties}, {3, determinism},          {4, minimal_start}, {5, aptitude_exactness},
        {6, comparative}, {7, robustness_ranking}, {8, complexity_direction}, {9, distribution}};
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& [id, check] : criteria) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, fmt::format("exception: {}", e.what())};
        }
        fmt::print("criterion {}: {} - {}\n", id, o.pass ? "PASS" : "FAIL", o.detail);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
