#include "voxevo/orchestrator.hpp"

#include "voxevo/distrib.hpp"

#include <fmt/format.h>

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace voxevo {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 3> kAlgoNames{"sga", "neat", "hyperneat"};

template <class T>
T checked_size(const ConfigDocument& doc, const std::string& key)
{
    const auto v = doc.get_int(key);
    if (v < 0) throw ConfigError(fmt::format("config key '{}' must be non-negative", key));
    return static_cast<T>(v);
}

}  // namespace

std::string_view algorithm_name(Algorithm a) noexcept { return kAlgoNames[static_cast<std::size_t>(a)]; }

std::optional<Algorithm> algorithm_from_name(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kAlgoNames.size(); ++i)
        if (kAlgoNames[i] == name) return static_cast<Algorithm>(i);
    return std::nullopt;
}

MorphologySource parse_morphology_source(std::string_view text)
{
    MorphologySource src;
    if (text == "bench-set") {
        src.kind = MorphologySource::Kind::BenchSet;
    } else if (text.starts_with("bench:")) {
        src.kind = MorphologySource::Kind::Bench;
        const std::string idx(text.substr(6));
        try {
            std::size_t used = 0;
            src.bench_index = std::stoi(idx, &used);
            if (used != idx.size()) throw std::invalid_argument(idx);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("bad benchmark index in '{}'", text));
        }
        if (src.bench_index < 1 || src.bench_index > 9) throw ConfigError(fmt::format("benchmark index must be 1..9, got {}", src.bench_index));
    } else if (!text.empty()) {
        src.kind = MorphologySource::Kind::File;
        src.path = std::string(text.starts_with("file:") ? text.substr(5) : text);
    } else {
        throw ConfigError("empty morphology source");
    }
    return src;
}

void CampaignConfig::validate() const
{
    if (algorithms.empty()) throw ConfigError("no algorithm selected");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!base_seed) throw ConfigError("a base seed is required");
    if (neat.generations != sga.generations)
        throw ConfigError("neat and sga generation counts differ; algorithms must share a generation axis");
    for (const int h : holdout)
        if (h < 1 || h > 9) throw ConfigError(fmt::format("holdout index must be 1..9, got {}", h));
    if (!holdout.empty() && morphology.kind != MorphologySource::Kind::BenchSet)
        throw ConfigError("holdout only applies to the benchmark set");
    if (holdout.size() >= 9) throw ConfigError("holdout leaves no training morphology");
    neat.validate();
    sga.validate();
    substrate.validate();
    sim.validate();
}

void apply_config(CampaignConfig& cfg, const ConfigDocument& doc)
{
    // shared budget first so per-algorithm sections can override it
    if (doc.has("pop_size")) cfg.neat.pop_size = cfg.sga.pop_size = checked_size<std::size_t>(doc, "pop_size");
    if (doc.has("generations")) cfg.neat.generations = cfg.sga.generations = checked_size<std::size_t>(doc, "generations");

    for (const auto& [key, value] : doc.entries()) {
        auto d = [&] { return doc.get_double(key); };
        auto z = [&] { return checked_size<std::size_t>(doc, key); };
        if (key == "pop_size" || key == "generations") continue;
        if (key == "algorithm") {
            cfg.algorithms.clear();
            for (const auto& name : doc.get_list(key)) {
                auto a = algorithm_from_name(name);
                if (!a) throw ConfigError(fmt::format("unknown algorithm '{}' (expected sga, neat or hyperneat)", name));
                cfg.algorithms.push_back(*a);
            }
        } else if (key == "morphology") cfg.morphology = parse_morphology_source(value);
        else if (key == "bench_seed") cfg.bench_seed = doc.get_uint(key);
        else if (key == "holdout") {
            cfg.holdout.clear();
            for (const auto& item : doc.get_list(key)) cfg.holdout.push_back(std::stoi(item));
        }
        else if (key == "trials") cfg.trials = z();
        else if (key == "base_seed") cfg.base_seed = doc.get_uint(key);
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "jobs") cfg.jobs = z();
        else if (key == "server") cfg.server = value;
        else if (key == "verbose") cfg.verbose = doc.get_bool(key);
        else if (key == "neat.pop_size") cfg.neat.pop_size = z();
        else if (key == "neat.generations") cfg.neat.generations = z();
        else if (key == "neat.compat_threshold") cfg.neat.compat_threshold = d();
        else if (key == "neat.c_disjoint") cfg.neat.c_disjoint = d();
        else if (key == "neat.c_weight") cfg.neat.c_weight = d();
        else if (key == "neat.max_stagnation") cfg.neat.max_stagnation = static_cast<int>(doc.get_int(key));
        else if (key == "neat.survival_threshold") cfg.neat.survival_threshold = d();
        else if (key == "neat.p_mut_activation") cfg.neat.p_mut_activation = d();
        else if (key == "neat.p_add_conn") cfg.neat.p_add_conn = d();
        else if (key == "neat.p_del_conn") cfg.neat.p_del_conn = d();
        else if (key == "neat.p_toggle_conn") cfg.neat.p_toggle_conn = d();
        else if (key == "neat.p_add_node") cfg.neat.p_add_node = d();
        else if (key == "neat.p_del_node") cfg.neat.p_del_node = d();
        else if (key == "neat.p_weight_mutate") cfg.neat.p_weight_mutate = d();
        else if (key == "neat.weight_sigma") cfg.neat.weight_sigma = d();
        else if (key == "neat.p_weight_replace") cfg.neat.p_weight_replace = d();
        else if (key == "neat.weight_limit") cfg.neat.weight_limit = d();
        else if (key == "neat.elitism") cfg.neat.elitism = z();
        else if (key == "neat.mutate_output_activation") cfg.neat.mutate_output_activation = doc.get_bool(key);
        else if (key == "sga.pop_size") cfg.sga.pop_size = z();
        else if (key == "sga.generations") cfg.sga.generations = z();
        else if (key == "sga.p_crossover") cfg.sga.p_crossover = d();
        else if (key == "sga.p_mutation") cfg.sga.p_mutation = d();
        else if (key == "sga.tournament_size") cfg.sga.tournament_size = z();
        else if (key == "sga.elitism") cfg.sga.elitism = z();
        else if (key == "hyperneat.hidden_layers") cfg.substrate.hidden_layers = static_cast<int>(doc.get_int(key));
        else if (key == "hyperneat.neurons_per_layer") cfg.substrate.neurons_per_layer = static_cast<int>(doc.get_int(key));
        else if (key == "hyperneat.weight_threshold") cfg.substrate.weight_threshold = d();
        else if (key == "hyperneat.weight_scale") cfg.substrate.weight_scale = d();
        else if (key == "sim.voxel_len") cfg.sim.voxel_len = d();
        else if (key == "sim.stiffness") cfg.sim.stiffness = d();
        else if (key == "sim.damping_ratio") cfg.sim.damping_ratio = d();
        else if (key == "sim.mass") cfg.sim.mass = d();
        else if (key == "sim.actuation_amp") cfg.sim.actuation_amp = d();
        else if (key == "sim.actuation_freq") cfg.sim.actuation_freq = d();
        else if (key == "sim.duration") cfg.sim.duration = d();
        else if (key == "sim.dt") cfg.sim.dt = d();
        else if (key == "sim.gravity") cfg.sim.gravity = d();
        else throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
}

MorphologySet resolve_morphologies(const CampaignConfig& cfg)
{
    MorphologySet set;
    switch (cfg.morphology.kind) {
    case MorphologySource::Kind::Bench: set.train.push_back(generate_benchmark(cfg.morphology.bench_index, cfg.bench_seed)); break;
    case MorphologySource::Kind::File: set.train.push_back(load_morphology(cfg.morphology.path)); break;
    case MorphologySource::Kind::BenchSet:
        for (int k = 1; k <= 9; ++k) {
            const bool held = std::find(cfg.holdout.begin(), cfg.holdout.end(), k) != cfg.holdout.end();
            (held ? set.holdout : set.train).push_back(generate_benchmark(k, cfg.bench_seed));
        }
        break;
    }
    return set;
}

// ---------------------------------------------------------------------------

FitnessService::FitnessService(JobRunner& runner, std::vector<VoxelGrid> grids, SimParams params)
    : runner_(runner), grids_(std::move(grids)), params_(params)
{
    if (grids_.empty()) throw std::invalid_argument("fitness needs at least one morphology");
}

std::vector<double> FitnessService::evaluate(const std::vector<Controller>& controllers)
{
    std::vector<EvalJob> jobs;
    jobs.reserve(controllers.size() * grids_.size());
    for (const auto& c : controllers) {
        const std::string text = serialize_controller(c);
        for (const auto& g : grids_) jobs.push_back({next_job_id_++, g.id(), text, params_});
    }
    const auto results = runner_.run(jobs);
    if (results.size() != jobs.size()) throw std::runtime_error("job runner returned the wrong number of results");

    std::vector<double> fitness;
    fitness.reserve(controllers.size());
    std::vector<double> per_grid(grids_.size());
    for (std::size_t i = 0; i < controllers.size(); ++i) {
        for (std::size_t k = 0; k < grids_.size(); ++k) {
            const auto& r = results[i * grids_.size() + k];
            if (r.job_id != jobs[i * grids_.size() + k].job_id) throw std::runtime_error("job runner returned results out of order");
            if (r.status == EvalStatus::Error) throw std::runtime_error(fmt::format("evaluation of job {} failed: {}", r.job_id, r.message));
            if (r.status == EvalStatus::Diverged)
                fmt::print(stderr, "warning: job {} on '{}' diverged; scoring {}\n", r.job_id, grids_[k].id(), r.displacement);
            per_grid[k] = r.displacement;
        }
        fitness.push_back(aptitude(per_grid));
    }
    return fitness;
}

TrialResult run_trial(const CampaignConfig& cfg, Algorithm algo, std::size_t trial, FitnessService& fitness)
{
    const auto start = std::chrono::steady_clock::now();
    TrialResult r;
    r.algorithm = algo;
    r.trial = trial;
    r.seed = cfg.base_seed.value_or(0) + trial;

    auto report = [&](const GenerationRecord& rec) {
        if (cfg.verbose)
            fmt::print(stderr, "{} trial {} gen {}: best {:.6g} mean {:.6g}\n", algorithm_name(algo), trial, rec.generation,
                       rec.best_fitness, rec.mean_fitness);
    };

    if (algo == Algorithm::Sga) {
        const Dims dims = fitness.grids().front().dims();
        for (const auto& g : fitness.grids())
            if (g.dims() != dims) throw std::invalid_argument("matrix controllers need every morphology to share dims");
        SgaConfig c = cfg.sga;
        c.seed = r.seed;
        SgaEngine engine(c, dims);
        const MatrixEvaluator eval = [&](const std::vector<MatrixGenome>& batch) {
            std::vector<Controller> cs;
            cs.reserve(batch.size());
            for (const auto& g : batch) cs.push_back(Controller::sga(g));
            return fitness.evaluate(cs);
        };
        for (std::size_t g = 0; g < c.generations; ++g) {
            r.log.push_back(engine.step(eval));
            report(r.log.back());
        }
        r.champion = Controller::sga(*engine.champion());
    } else {
        NeatConfig c = cfg.neat;
        c.seed = r.seed;
        const bool hyper = algo == Algorithm::Hyperneat;
        auto wrap = [&](const CppnGenome& g) { return hyper ? Controller::hyperneat(g, cfg.substrate) : Controller::neat(g); };
        NeatEngine engine(c, hyper ? kHyperIo : IoSpec{4, 1});
        const GenomeEvaluator eval = [&](const std::vector<CppnGenome>& batch) {
            std::vector<Controller> cs;
            cs.reserve(batch.size());
            for (const auto& g : batch) cs.push_back(wrap(g));
            return fitness.evaluate(cs);
        };
        for (std::size_t g = 0; g < c.generations; ++g) {
            GenerationRecord rec = engine.step(eval);
            if (hyper) {
                const auto cx = complexity_report(wrap(*engine.champion()));
                rec.champion_hidden_nodes = cx.hidden_nodes;
                rec.champion_connections = cx.connections;
            }
            if (rec.restarted) ++r.restarts;
            r.log.push_back(rec);
            report(rec);
        }
        r.champion = wrap(*engine.champion());
    }
    r.champion_fitness = r.champion.fitness().value();
    if (algo != Algorithm::Sga) r.complexity = complexity_report(r.champion);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

// ---------------------------------------------------------------------------

namespace {

std::string opt_field(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string{}; }

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    f << content;
    if (!f) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace

void write_trial_csv(std::ostream& out, const std::vector<GenerationRecord>& log)
{
    out << "generation,best_fitness,mean_fitness,n_species,champion_hidden_nodes,champion_connections\n";
    for (const auto& r : log) {
        out << fmt::format("{},{:.17g},{:.17g},{},{},{}\n", r.generation, r.best_fitness, r.mean_fitness, opt_field(r.n_species),
                           opt_field(r.champion_hidden_nodes), opt_field(r.champion_connections));
    }
}

std::vector<GenerationRecord> read_trial_csv(std::istream& in)
{
    std::vector<GenerationRecord> log;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trial log");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        while (f.size() < 6) f.emplace_back();
        if (f.size() != 6) throw std::runtime_error(fmt::format("malformed trial log row '{}'", line));
        auto opt = [](const std::string& s) -> std::optional<std::size_t> {
            if (s.empty()) return std::nullopt;
            return static_cast<std::size_t>(std::stoull(s));
        };
        GenerationRecord r;
        r.generation = std::stoull(f[0]);
        r.best_fitness = std::strtod(f[1].c_str(), nullptr);
        r.mean_fitness = std::strtod(f[2].c_str(), nullptr);
        r.n_species = opt(f[3]);
        r.champion_hidden_nodes = opt(f[4]);
        r.champion_connections = opt(f[5]);
        log.push_back(r);
    }
    return log;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials)
{
    std::vector<AggregateRow> rows;
    if (trials.empty()) return rows;
    std::size_t gens = trials.front().log.size();
    for (const auto& t : trials) gens = std::min(gens, t.log.size());
    for (std::size_t g = 0; g < gens; ++g) {
        AggregateRow row;
        row.generation = g;
        row.trials = trials.size();
        double sum = 0;
        for (const auto& t : trials) sum += t.log[g].best_fitness;
        row.mean_best = sum / static_cast<double>(trials.size());
        if (trials.size() >= 2) {
            double ss = 0;
            for (const auto& t : trials) ss += (t.log[g].best_fitness - row.mean_best) * (t.log[g].best_fitness - row.mean_best);
            row.sd_best = std::sqrt(ss / static_cast<double>(trials.size() - 1));
        }
        rows.push_back(row);
    }
    return rows;
}

void write_outputs(const std::string& dir, const std::vector<TrialResult>& trials)
{
    const fs::path root(dir);
    fs::create_directories(root);
    std::string summary = "trial,seed,champion_fitness,restarts,holdout_aptitude\n";
    std::string timing = "trial,wall_seconds\n";
    std::string complexity = "trial,seed,hidden_nodes,connections\n";
    for (const auto& t : trials) {
        std::ostringstream log;
        write_trial_csv(log, t.log);
        write_file(root / fmt::format("trial_{}.csv", t.trial), log.str());
        write_file(root / fmt::format("champion_{}.genome", t.trial), serialize_controller(t.champion));
        summary += fmt::format("{},{},{:.17g},{},{}\n", t.trial, t.seed, t.champion_fitness, t.restarts,
                               t.holdout_aptitude ? fmt::format("{:.17g}", *t.holdout_aptitude) : std::string{});
        timing += fmt::format("{},{:.3f}\n", t.trial, t.wall_seconds);
        if (t.complexity) complexity += fmt::format("{},{},{},{}\n", t.trial, t.seed, t.complexity->hidden_nodes, t.complexity->connections);
    }
    std::string agg = "generation,mean_best_fitness,sd_best_fitness,trials\n";
    for (const auto& row : aggregate(trials))
        agg += fmt::format("{},{:.17g},{},{}\n", row.generation, row.mean_best, row.sd_best ? fmt::format("{:.17g}", *row.sd_best) : std::string{},
                           row.trials);
    write_file(root / "aggregate.csv", agg);
    write_file(root / "complexity.csv", complexity);
    write_file(root / "summary.csv", summary);
    write_file(root / "timing.csv", timing);
}

CampaignResult run_campaign(const CampaignConfig& cfg, JobRunner* runner)
{
    cfg.validate();
    const MorphologySet set = resolve_morphologies(cfg);

    std::unique_ptr<JobRunner> owned;
    if (!runner) {
        if (!cfg.server.empty()) {
            owned = std::make_unique<RemoteRunner>(cfg.server);
        } else {
            auto registry = std::make_shared<MorphologyRegistry>();
            for (const auto& g : set.train) registry->add(g);
            owned = std::make_unique<LocalRunner>(registry, cfg.jobs);
        }
        runner = owned.get();
    }

    CampaignResult result;
    for (const Algorithm algo : cfg.algorithms) {
        const std::string dir = cfg.algorithms.size() > 1 ? (fs::path(cfg.out_dir) / algorithm_name(algo)).string() : cfg.out_dir;
        FitnessService fitness(*runner, set.train, cfg.sim);
        auto& trials = result.trials[algo];
        for (std::size_t i = 0; i < cfg.trials; ++i) {
            TrialResult t = run_trial(cfg, algo, i, fitness);
            if (!set.holdout.empty()) t.holdout_aptitude = evaluate_robustness(t.champion, set.holdout, cfg.sim);
            trials.push_back(std::move(t));
            write_outputs(dir, trials);
        }
    }
    return result;
}

}  // namespace voxevo
