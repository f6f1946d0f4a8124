#pragma once

#include "voxevo/morphology.hpp"
#include "voxevo/neat.hpp"
#include "voxevo/physics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace voxevo {

/// Direct encoding: one phase per lattice position of the target grid.
struct MatrixGenome {
    Dims dims;
    std::vector<double> values;
    std::optional<double> fitness;

    PhaseField to_field() const { return PhaseField(dims, values); }

    friend bool operator==(const MatrixGenome& a, const MatrixGenome& b) { return a.dims == b.dims && a.values == b.values; }
};

struct SgaConfig {
    std::size_t pop_size = 50;
    std::size_t generations = 200;
    double p_crossover = 0.9;
    double p_mutation = 0.1;
    std::size_t tournament_size = 3;
    std::size_t elitism = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<MatrixGenome> sga_init(const SgaConfig& config, Dims dims, Rng& rng);

/// Children with the [i, j) segment of the flattened arrays swapped.
std::pair<MatrixGenome, MatrixGenome> swap_segment(const MatrixGenome& a, const MatrixGenome& b, std::size_t i, std::size_t j);

/// With probability p_crossover draws cuts i < j and swaps; otherwise copies.
std::pair<MatrixGenome, MatrixGenome> two_point_crossover(const MatrixGenome& a, const MatrixGenome& b, double p_crossover, Rng& rng);

/// With probability p_mutation replaces one uniformly chosen entry.
MatrixGenome sga_mutate(MatrixGenome g, double p_mutation, Rng& rng);

/// Elitism, then tournament selection, crossover and mutation. Every member needs a fitness.
std::vector<MatrixGenome> sga_step(const std::vector<MatrixGenome>& population, const SgaConfig& config, Rng& rng);

using MatrixEvaluator = std::function<std::vector<double>(const std::vector<MatrixGenome>&)>;

class SgaEngine {
public:
    SgaEngine(SgaConfig config, Dims dims);

    GenerationRecord step(const MatrixEvaluator& evaluate);
    std::vector<GenerationRecord> run(const MatrixEvaluator& evaluate);

    const std::vector<MatrixGenome>& population() const noexcept { return population_; }
    const std::optional<MatrixGenome>& champion() const noexcept { return champion_; }
    std::size_t generation() const noexcept { return generation_; }

private:
    SgaConfig config_;
    Rng rng_;
    std::vector<MatrixGenome> population_;
    std::optional<MatrixGenome> champion_;
    std::size_t generation_ = 0;
};

}  // namespace voxevo
