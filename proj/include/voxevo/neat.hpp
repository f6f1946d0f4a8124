#pragma once

#include "voxevo/cppn.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace voxevo {

using Rng = std::mt19937_64;

struct NeatConfig {
    std::size_t pop_size = 50;
    std::size_t generations = 200;
    double compat_threshold = 3.0;
    double c_disjoint = 1.0;
    double c_weight = 0.5;
    int max_stagnation = 25;
    double survival_threshold = 0.2;
    double p_mut_activation = 0.4;
    double p_add_conn = 0.2;
    double p_del_conn = 0.1;
    double p_toggle_conn = 0.5;
    double p_add_node = 0.2;
    double p_del_node = 0.1;
    double p_weight_mutate = 0.8;
    double weight_sigma = 0.5;
    double p_weight_replace = 0.1;
    double weight_limit = 8.0;
    std::size_t elitism = 1;
    /// Output activations stay fixed (identity) unless enabled.
    bool mutate_output_activation = false;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Hands out innovation numbers and split-node ids. Structural signatures
/// seen in the current generation reuse their number.
class InnovationTracker {
public:
    InnovationTracker() = default;
    InnovationTracker(Innovation next_innovation, NodeId next_node) : next_innovation_(next_innovation), next_node_(next_node) {}

    Innovation connection(NodeId from, NodeId to);
    /// Node id for splitting the connection with the given innovation.
    NodeId split_node(Innovation split);
    void new_generation();

    Innovation next_innovation() const noexcept { return next_innovation_; }
    NodeId next_node() const noexcept { return next_node_; }

private:
    Innovation next_innovation_ = 0;
    NodeId next_node_ = 0;
    std::map<std::pair<NodeId, NodeId>, Innovation> conn_this_gen_;
    std::map<Innovation, NodeId> split_this_gen_;
};

struct Species {
    int id = 0;
    CppnGenome representative;
    std::vector<std::size_t> members;  ///< indices into the population
    std::vector<double> best_fitness_history;
    double best_fitness_ever = -std::numeric_limits<double>::infinity();
    int stagnation = 0;
};

struct SpeciationResult {
    std::vector<Species> species;
    std::vector<int> eliminated;  ///< ids of species dropped for stagnation
};

struct IoSpec {
    std::size_t inputs = 4;
    std::size_t outputs = 1;
};

std::vector<CppnGenome> init_population(const NeatConfig& config, IoSpec io, Rng& rng, InnovationTracker& tracker);

double compatibility_distance(const CppnGenome& a, const CppnGenome& b, const NeatConfig& config);

/// Assigns every genome to the first species (ascending id) whose
/// representative is within the threshold, founding new species as needed.
/// Stagnation counters advance for species whose members all have fitness;
/// species past max_stagnation are dropped while more than two remain.
SpeciationResult speciate(const std::vector<CppnGenome>& population, std::vector<Species> previous,
                          const NeatConfig& config, int& next_species_id);

/// Canonical NEAT crossover; `a_fitter` decides whose disjoint/excess genes survive.
CppnGenome crossover(const CppnGenome& a, const CppnGenome& b, bool a_fitter, Rng& rng);

void mutate(CppnGenome& genome, const NeatConfig& config, Rng& rng, InnovationTracker& tracker);

struct ReproductionResult {
    std::vector<CppnGenome> population;
    std::vector<Species> species;  ///< carried forward with updated representatives
    bool restarted = false;
};

/// Offspring quotas by shifted mean fitness (largest remainder), truncation
/// to the top survival_threshold, per-species elitism for species of size >= 3.
ReproductionResult reproduce(const std::vector<CppnGenome>& population, std::vector<Species> species,
                             const NeatConfig& config, IoSpec io, Rng& rng, InnovationTracker& tracker);

/// Largest-remainder apportionment of `total` by non-negative weights.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total);

struct GenerationRecord {
    std::size_t generation = 0;
    double best_fitness = 0;  ///< best so far
    double mean_fitness = 0;  ///< this generation
    std::optional<std::size_t> n_species;  ///< unset for the direct-encoding GA
    std::optional<std::size_t> champion_hidden_nodes;
    std::optional<std::size_t> champion_connections;
    bool restarted = false;

    friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

/// Batch fitness: one value per genome, same order.
using GenomeEvaluator = std::function<std::vector<double>(const std::vector<CppnGenome>&)>;

/// Sequential NEAT loop with one seeded generator.
class NeatEngine {
public:
    NeatEngine(NeatConfig config, IoSpec io);

    /// Evaluates the current population and breeds the next one.
    GenerationRecord step(const GenomeEvaluator& evaluate);
    std::vector<GenerationRecord> run(const GenomeEvaluator& evaluate);

    const std::vector<CppnGenome>& population() const noexcept { return population_; }
    const std::vector<Species>& species() const noexcept { return species_; }
    const std::optional<CppnGenome>& champion() const noexcept { return champion_; }
    std::size_t generation() const noexcept { return generation_; }

private:
    NeatConfig config_;
    IoSpec io_;
    Rng rng_;
    InnovationTracker tracker_;
    std::vector<CppnGenome> population_;
    std::vector<Species> species_;
    int next_species_id_ = 1;
    std::optional<CppnGenome> champion_;
    std::size_t generation_ = 0;
};

}  // namespace voxevo
