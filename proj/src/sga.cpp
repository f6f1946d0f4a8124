#include "voxevo/sga.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace voxevo {

namespace {

double random_phase(Rng& rng) { return std::uniform_real_distribution<double>(-kMaxPhase, kMaxPhase)(rng); }

}  // namespace

void SgaConfig::validate() const
{
    if (!(p_crossover >= 0 && p_crossover <= 1)) throw std::invalid_argument("sga.p_crossover must be in [0, 1]");
    if (!(p_mutation >= 0 && p_mutation <= 1)) throw std::invalid_argument("sga.p_mutation must be in [0, 1]");
    if (pop_size < 2) throw std::invalid_argument("sga.pop_size must be >= 2");
    if (tournament_size < 1) throw std::invalid_argument("sga.tournament_size must be >= 1");
    if (elitism > pop_size) throw std::invalid_argument("sga.elitism must not exceed pop_size");
}

std::vector<MatrixGenome> sga_init(const SgaConfig& config, Dims dims, Rng& rng)
{
    std::vector<MatrixGenome> pop(config.pop_size);
    for (auto& g : pop) {
        g.dims = dims;
        g.values.resize(dims.volume());
        for (auto& v : g.values) v = random_phase(rng);
    }
    return pop;
}

std::pair<MatrixGenome, MatrixGenome> swap_segment(const MatrixGenome& a, const MatrixGenome& b, std::size_t i, std::size_t j)
{
    if (a.dims != b.dims || a.values.size() != b.values.size()) throw std::invalid_argument("crossover parents differ in shape");
    if (i > j || j > a.values.size()) throw std::out_of_range("crossover cut points out of range");
    MatrixGenome c1{a.dims, a.values, std::nullopt};
    MatrixGenome c2{b.dims, b.values, std::nullopt};
    std::swap_ranges(c1.values.begin() + static_cast<std::ptrdiff_t>(i), c1.values.begin() + static_cast<std::ptrdiff_t>(j),
                     c2.values.begin() + static_cast<std::ptrdiff_t>(i));
    return {std::move(c1), std::move(c2)};
}

std::pair<MatrixGenome, MatrixGenome> two_point_crossover(const MatrixGenome& a, const MatrixGenome& b, double p_crossover, Rng& rng)
{
    if (a.dims != b.dims || a.values.size() != b.values.size()) throw std::invalid_argument("crossover parents differ in shape");
    const std::size_t n = a.values.size();
    if (n >= 2 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_crossover) {
        // distinct cut points in [0, n], ordered
        std::uniform_int_distribution<std::size_t> cut(0, n);
        std::size_t i = cut(rng), j = cut(rng);
        while (j == i) j = cut(rng);
        if (i > j) std::swap(i, j);
        return swap_segment(a, b, i, j);
    }
    return {a, b};  // unchanged copies keep their fitness
}

MatrixGenome sga_mutate(MatrixGenome g, double p_mutation, Rng& rng)
{
    if (!g.values.empty() && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p_mutation) {
        const auto idx = std::uniform_int_distribution<std::size_t>(0, g.values.size() - 1)(rng);
        g.values[idx] = random_phase(rng);
        g.fitness.reset();
    }
    return g;
}

std::vector<MatrixGenome> sga_step(const std::vector<MatrixGenome>& population, const SgaConfig& config, Rng& rng)
{
    for (const auto& g : population)
        if (!g.fitness) throw std::logic_error("sga_step requires every member to have a fitness");
    const std::size_t n = population.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *population[a].fitness > *population[b].fitness; });

    std::vector<MatrixGenome> next;
    next.reserve(n);
    for (std::size_t e = 0; e < config.elitism && e < n; ++e) next.push_back(population[order[e]]);

    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    auto tournament = [&]() -> const MatrixGenome& {
        std::size_t best = pick(rng);
        for (std::size_t k = 1; k < config.tournament_size; ++k) {
            const std::size_t c = pick(rng);
            if (*population[c].fitness > *population[best].fitness) best = c;
        }
        return population[best];
    };
    while (next.size() < n) {
        const MatrixGenome& p1 = tournament();
        const MatrixGenome& p2 = tournament();
        auto [c1, c2] = two_point_crossover(p1, p2, config.p_crossover, rng);
        c1 = sga_mutate(std::move(c1), config.p_mutation, rng);
        c2 = sga_mutate(std::move(c2), config.p_mutation, rng);
        next.push_back(std::move(c1));
        if (next.size() < n) next.push_back(std::move(c2));
    }
    return next;
}

SgaEngine::SgaEngine(SgaConfig config, Dims dims) : config_(std::move(config)), rng_(config_.seed)
{
    config_.validate();
    population_ = sga_init(config_, dims, rng_);
}

GenerationRecord SgaEngine::step(const MatrixEvaluator& evaluate)
{
    std::vector<std::size_t> pending;
    std::vector<MatrixGenome> batch;
    for (std::size_t i = 0; i < population_.size(); ++i)
        if (!population_[i].fitness) {
            pending.push_back(i);
            batch.push_back(population_[i]);
        }
    if (!batch.empty()) {
        const auto scores = evaluate(batch);
        if (scores.size() != batch.size()) throw std::logic_error("evaluator returned the wrong number of scores");
        for (std::size_t k = 0; k < pending.size(); ++k) population_[pending[k]].fitness = scores[k];
    }
    GenerationRecord rec;
    rec.generation = generation_;
    double sum = 0;
    for (const auto& g : population_) {
        sum += *g.fitness;
        if (!champion_ || *g.fitness > *champion_->fitness) champion_ = g;
    }
    rec.mean_fitness = sum / static_cast<double>(population_.size());
    rec.best_fitness = *champion_->fitness;
    population_ = sga_step(population_, config_, rng_);
    ++generation_;
    return rec;
}

std::vector<GenerationRecord> SgaEngine::run(const MatrixEvaluator& evaluate)
{
    std::vector<GenerationRecord> log;
    for (std::size_t g = 0; g < config_.generations; ++g) log.push_back(step(evaluate));
    return log;
}

}  // namespace voxevo
