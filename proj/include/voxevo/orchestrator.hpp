#pragma once

#include "voxevo/controller.hpp"
#include "voxevo/evaluation.hpp"
#include "voxevo/experiment_config.hpp"
#include "voxevo/hyperneat.hpp"
#include "voxevo/neat.hpp"
#include "voxevo/sga.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace voxevo {

enum class Algorithm { Sga, Neat, Hyperneat };

std::string_view algorithm_name(Algorithm a) noexcept;
std::optional<Algorithm> algorithm_from_name(std::string_view name) noexcept;

struct MorphologySource {
    enum class Kind { Bench, BenchSet, File };
    Kind kind = Kind::Bench;
    int bench_index = 1;
    std::string path;
};

/// Parses `bench:K`, `bench-set` or a file path.
MorphologySource parse_morphology_source(std::string_view text);

struct CampaignConfig {
    std::vector<Algorithm> algorithms{Algorithm::Neat};
    MorphologySource morphology;
    std::uint64_t bench_seed = kDefaultBenchSeed;
    std::vector<int> holdout;  ///< benchmark indices left out of training in bench-set mode
    std::size_t trials = 1;
    std::optional<std::uint64_t> base_seed;
    std::string out_dir = "results";
    std::size_t jobs = 1;
    std::string server;  ///< evaluate through a master when non-empty
    NeatConfig neat;
    SgaConfig sga;
    SubstrateSpec substrate;
    SimParams sim;
    bool verbose = false;

    void validate() const;
};

/// Applies every entry of the document, rejecting unknown keys.
void apply_config(CampaignConfig& cfg, const ConfigDocument& doc);

/// Training grids (and held-out grids) named by the morphology source.
struct MorphologySet {
    std::vector<VoxelGrid> train;
    std::vector<VoxelGrid> holdout;
};
MorphologySet resolve_morphologies(const CampaignConfig& cfg);

struct TrialResult {
    Algorithm algorithm = Algorithm::Neat;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::vector<GenerationRecord> log;
    Controller champion;
    double champion_fitness = 0;
    std::optional<ComplexityReport> complexity;
    std::optional<double> holdout_aptitude;
    std::size_t restarts = 0;
    double wall_seconds = 0;
};

/// Scores controllers on a fixed morphology set through a job runner. The
/// fitness of a controller is the mean displacement over the set.
class FitnessService {
public:
    FitnessService(JobRunner& runner, std::vector<VoxelGrid> grids, SimParams params);

    std::vector<double> evaluate(const std::vector<Controller>& controllers);
    std::uint64_t jobs_issued() const noexcept { return next_job_id_; }
    const std::vector<VoxelGrid>& grids() const noexcept { return grids_; }

private:
    JobRunner& runner_;
    std::vector<VoxelGrid> grids_;
    SimParams params_;
    std::uint64_t next_job_id_ = 0;
};

TrialResult run_trial(const CampaignConfig& cfg, Algorithm algo, std::size_t trial, FitnessService& fitness);

struct CampaignResult {
    std::map<Algorithm, std::vector<TrialResult>> trials;
};

/// Runs every (algorithm, trial) pair and writes the result files. With
/// several algorithms each gets its own subdirectory of out_dir.
CampaignResult run_campaign(const CampaignConfig& cfg, JobRunner* runner = nullptr);

void write_trial_csv(std::ostream& out, const std::vector<GenerationRecord>& log);
std::vector<GenerationRecord> read_trial_csv(std::istream& in);

struct AggregateRow {
    std::size_t generation = 0;
    double mean_best = 0;
    std::optional<double> sd_best;  ///< sample standard deviation, needs two trials
    std::size_t trials = 0;
};
std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials);

void write_outputs(const std::string& dir, const std::vector<TrialResult>& trials);

}  // namespace voxevo
