#include "voxevo/neat.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace voxevo {

void NeatConfig::validate() const
{
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(fmt::format("neat.{} must be in [0, 1]", name));
    };
    prob(survival_threshold, "survival_threshold");
    prob(p_mut_activation, "p_mut_activation");
    prob(p_add_conn, "p_add_conn");
    prob(p_del_conn, "p_del_conn");
    prob(p_toggle_conn, "p_toggle_conn");
    prob(p_add_node, "p_add_node");
    prob(p_del_node, "p_del_node");
    prob(p_weight_mutate, "p_weight_mutate");
    prob(p_weight_replace, "p_weight_replace");
    if (p_weight_mutate + p_weight_replace > 1.0) throw std::invalid_argument("neat.p_weight_mutate + p_weight_replace must be <= 1");
    if (pop_size < 2) throw std::invalid_argument("neat.pop_size must be >= 2");
    if (!(compat_threshold > 0)) throw std::invalid_argument("neat.compat_threshold must be > 0");
    if (!(weight_limit > 0)) throw std::invalid_argument("neat.weight_limit must be > 0");
    if (!(weight_sigma >= 0)) throw std::invalid_argument("neat.weight_sigma must be >= 0");
}

// ---------------------------------------------------------------------------
// Innovation tracking

Innovation InnovationTracker::connection(NodeId from, NodeId to)
{
    auto [it, inserted] = conn_this_gen_.try_emplace({from, to}, next_innovation_);
    if (inserted) ++next_innovation_;
    return it->second;
}

NodeId InnovationTracker::split_node(Innovation split)
{
    auto [it, inserted] = split_this_gen_.try_emplace(split, next_node_);
    if (inserted) ++next_node_;
    return it->second;
}

void InnovationTracker::new_generation()
{
    conn_this_gen_.clear();
    split_this_gen_.clear();
}

// ---------------------------------------------------------------------------

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
bool chance(Rng& rng, double p) { return p > 0.0 && uniform(rng, 0.0, 1.0) < p; }

template <class T>
std::size_t pick_index(Rng& rng, const std::vector<T>& v)
{
    return std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng);
}

Activation random_activation(Rng& rng)
{
    return kAllActivations[std::uniform_int_distribution<std::size_t>(0, kActivationCount - 1)(rng)];
}

}  // namespace

std::vector<CppnGenome> init_population(const NeatConfig& config, IoSpec io, Rng& rng, InnovationTracker& tracker)
{
    if (io.inputs < 1 || io.outputs < 1) throw std::invalid_argument("genomes need at least one input and one output");
    tracker = InnovationTracker(static_cast<Innovation>(io.inputs * io.outputs), static_cast<NodeId>(io.inputs + io.outputs));
    std::vector<CppnGenome> pop;
    pop.reserve(config.pop_size);
    for (std::size_t i = 0; i < config.pop_size; ++i) {
        CppnGenome g = make_minimal_genome(io.inputs, io.outputs);
        for (auto& n : g.nodes)
            if (n.role == NodeRole::Output) n.bias = uniform(rng, -1.0, 1.0);
        for (auto& c : g.conns) c.weight = uniform(rng, -1.0, 1.0);
        pop.push_back(std::move(g));
    }
    return pop;
}

double compatibility_distance(const CppnGenome& a, const CppnGenome& b, const NeatConfig& config)
{
    std::size_t i = 0, j = 0, unmatched = 0, matched = 0;
    double weight_diff = 0.0;
    while (i < a.conns.size() && j < b.conns.size()) {
        const auto ia = a.conns[i].innovation;
        const auto ib = b.conns[j].innovation;
        if (ia == ib) {
            weight_diff += std::abs(a.conns[i].weight - b.conns[j].weight);
            ++matched;
            ++i;
            ++j;
        } else if (ia < ib) {
            ++unmatched;
            ++i;
        } else {
            ++unmatched;
            ++j;
        }
    }
    unmatched += (a.conns.size() - i) + (b.conns.size() - j);
    const double n = static_cast<double>(std::max<std::size_t>({a.conns.size(), b.conns.size(), 1}));
    const double mean_w = matched ? weight_diff / static_cast<double>(matched) : 0.0;
    return config.c_disjoint * static_cast<double>(unmatched) / n + config.c_weight * mean_w;
}

SpeciationResult speciate(const std::vector<CppnGenome>& population, std::vector<Species> previous,
                          const NeatConfig& config, int& next_species_id)
{
    SpeciationResult out;
    std::sort(previous.begin(), previous.end(), [](const Species& a, const Species& b) { return a.id < b.id; });
    for (auto& s : previous) s.members.clear();

    for (std::size_t idx = 0; idx < population.size(); ++idx) {
        bool placed = false;
        for (auto& s : previous) {
            if (compatibility_distance(population[idx], s.representative, config) < config.compat_threshold) {
                s.members.push_back(idx);
                placed = true;
                break;
            }
        }
        if (!placed) {
            Species s;
            s.id = next_species_id++;
            s.representative = population[idx];
            s.members.push_back(idx);
            previous.push_back(std::move(s));
        }
    }
    std::erase_if(previous, [](const Species& s) { return s.members.empty(); });

    for (auto& s : previous) {
        const bool scored = std::all_of(s.members.begin(), s.members.end(), [&](std::size_t m) { return population[m].fitness.has_value(); });
        if (!scored) continue;
        double best = -std::numeric_limits<double>::infinity();
        for (const auto m : s.members) best = std::max(best, *population[m].fitness);
        s.best_fitness_history.push_back(best);
        if (best > s.best_fitness_ever) {
            s.best_fitness_ever = best;
            s.stagnation = 0;
        } else {
            ++s.stagnation;
        }
    }

    std::vector<const Species*> stale;
    for (const auto& s : previous)
        if (s.stagnation > config.max_stagnation) stale.push_back(&s);
    std::sort(stale.begin(), stale.end(), [](const Species* a, const Species* b) {
        return a->best_fitness_ever != b->best_fitness_ever ? a->best_fitness_ever < b->best_fitness_ever : a->id < b->id;
    });
    std::size_t alive = previous.size();
    for (const Species* s : stale) {
        if (alive <= 2) break;
        out.eliminated.push_back(s->id);
        --alive;
    }
    for (auto& s : previous) {
        if (std::find(out.eliminated.begin(), out.eliminated.end(), s.id) == out.eliminated.end()) {
            out.species.push_back(std::move(s));
        }
    }
    return out;
}

CppnGenome crossover(const CppnGenome& a, const CppnGenome& b, bool a_fitter, Rng& rng)
{
    const CppnGenome& fit = a_fitter ? a : b;
    const CppnGenome& other = a_fitter ? b : a;
    CppnGenome child;
    child.nodes.reserve(fit.nodes.size());
    for (const auto& n : fit.nodes) {
        const NodeGene* m = other.find_node(n.id);
        child.nodes.push_back(m && chance(rng, 0.5) ? *m : n);
    }
    child.conns.reserve(fit.conns.size());
    std::size_t j = 0;
    for (const auto& c : fit.conns) {
        while (j < other.conns.size() && other.conns[j].innovation < c.innovation) ++j;
        const bool match = j < other.conns.size() && other.conns[j].innovation == c.innovation;
        child.conns.push_back(match && chance(rng, 0.5) ? other.conns[j] : c);
    }
    return child;
}

namespace {

double mutate_value(double v, const NeatConfig& cfg, Rng& rng)
{
    const double r = uniform(rng, 0.0, 1.0);
    if (r < cfg.p_weight_mutate) {
        v += std::normal_distribution<double>(0.0, cfg.weight_sigma)(rng);
    } else if (r < cfg.p_weight_mutate + cfg.p_weight_replace) {
        v = uniform(rng, -1.0, 1.0);
    }
    return std::clamp(v, -cfg.weight_limit, cfg.weight_limit);
}

void mutate_add_conn(CppnGenome& g, Rng& rng, InnovationTracker& tracker)
{
    std::vector<NodeId> sources, targets;
    for (const auto& n : g.nodes) {
        if (n.role != NodeRole::Output) sources.push_back(n.id);
        if (n.role != NodeRole::Input) targets.push_back(n.id);
    }
    std::sort(sources.begin(), sources.end());
    std::sort(targets.begin(), targets.end());
    std::vector<std::pair<NodeId, NodeId>> candidates;
    for (const auto from : sources)
        for (const auto to : targets) {
            if (from == to || g.find_conn(from, to) || g.find_conn(to, from)) continue;
            if (creates_cycle(g.conns, from, to)) continue;
            candidates.emplace_back(from, to);
        }
    if (candidates.empty()) return;
    const auto [from, to] = candidates[pick_index(rng, candidates)];
    const double w = uniform(rng, -1.0, 1.0);
    g.add_conn({tracker.connection(from, to), from, to, w, true});
}

void mutate_add_node(CppnGenome& g, Rng& rng, InnovationTracker& tracker)
{
    std::vector<std::size_t> enabled;
    for (std::size_t i = 0; i < g.conns.size(); ++i)
        if (g.conns[i].enabled) enabled.push_back(i);
    if (enabled.empty()) return;
    const ConnGene old = g.conns[enabled[pick_index(rng, enabled)]];
    const NodeId node = tracker.split_node(old.innovation);
    const Activation act = random_activation(rng);
    if (g.has_node(node)) return;
    for (auto& c : g.conns)
        if (c.innovation == old.innovation) c.enabled = false;
    g.nodes.push_back({node, NodeRole::Hidden, act, 0.0});
    g.add_conn({tracker.connection(old.from, node), old.from, node, 1.0, true});
    g.add_conn({tracker.connection(node, old.to), node, old.to, old.weight, true});
}

}  // namespace

void mutate(CppnGenome& g, const NeatConfig& cfg, Rng& rng, InnovationTracker& tracker)
{
    g.fitness.reset();

    for (auto& c : g.conns) c.weight = mutate_value(c.weight, cfg, rng);
    for (auto& n : g.nodes)
        if (n.role != NodeRole::Input) n.bias = mutate_value(n.bias, cfg, rng);

    if (chance(rng, cfg.p_mut_activation)) {
        std::vector<std::size_t> eligible;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const auto role = g.nodes[i].role;
            if (role == NodeRole::Hidden || (role == NodeRole::Output && cfg.mutate_output_activation)) eligible.push_back(i);
        }
        if (!eligible.empty()) {
            const std::size_t i = eligible[pick_index(rng, eligible)];
            g.nodes[i].activation = random_activation(rng);
        }
    }

    if (chance(rng, cfg.p_add_conn)) mutate_add_conn(g, rng, tracker);

    if (chance(rng, cfg.p_del_conn) && !g.conns.empty()) {
        g.conns.erase(g.conns.begin() + static_cast<std::ptrdiff_t>(pick_index(rng, g.conns)));
    }

    if (chance(rng, cfg.p_toggle_conn) && !g.conns.empty()) {
        auto& c = g.conns[pick_index(rng, g.conns)];
        c.enabled = !c.enabled;
    }

    if (chance(rng, cfg.p_add_node)) mutate_add_node(g, rng, tracker);

    if (chance(rng, cfg.p_del_node)) {
        std::vector<NodeId> hidden;
        for (const auto& n : g.nodes)
            if (n.role == NodeRole::Hidden) hidden.push_back(n.id);
        if (!hidden.empty()) {
            const NodeId victim = hidden[pick_index(rng, hidden)];
            std::erase_if(g.nodes, [&](const NodeGene& n) { return n.id == victim; });
            std::erase_if(g.conns, [&](const ConnGene& c) { return c.from == victim || c.to == victim; });
        }
    }
}

std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total)
{
    std::vector<std::size_t> out(weights.size(), 0);
    if (weights.empty()) return out;
    double sum = 0;
    for (const double w : weights) sum += w;
    std::vector<double> w = weights;
    if (!(sum > 0)) {
        std::fill(w.begin(), w.end(), 1.0);
        sum = static_cast<double>(w.size());
    }
    std::vector<double> rem(w.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double exact = w[i] / sum * static_cast<double>(total);
        out[i] = static_cast<std::size_t>(std::floor(exact));
        rem[i] = exact - std::floor(exact);
        assigned += out[i];
    }
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size(), ++assigned) ++out[order[k]];
    while (assigned > total) {
        // floating-point overshoot; trim from the largest quota
        auto it = std::max_element(out.begin(), out.end());
        --*it;
        --assigned;
    }
    return out;
}

ReproductionResult reproduce(const std::vector<CppnGenome>& population, std::vector<Species> species,
                             const NeatConfig& config, IoSpec io, Rng& rng, InnovationTracker& tracker)
{
    ReproductionResult out;
    tracker.new_generation();
    std::erase_if(species, [](const Species& s) { return s.members.empty(); });
    if (species.empty()) {
        out.population = init_population(config, io, rng, tracker);
        out.restarted = true;
        return out;
    }

    double min_f = std::numeric_limits<double>::infinity();
    for (const auto& s : species)
        for (const auto m : s.members) {
            if (!population[m].fitness) throw std::logic_error("reproduce requires every member to have a fitness");
            min_f = std::min(min_f, *population[m].fitness);
        }
    std::vector<double> shares;
    for (const auto& s : species) {
        double sum = 0;
        for (const auto m : s.members) sum += *population[m].fitness - min_f;
        shares.push_back(sum / static_cast<double>(s.members.size()));
    }
    const auto quotas = apportion(shares, config.pop_size);

    for (std::size_t si = 0; si < species.size(); ++si) {
        Species& s = species[si];
        std::vector<std::size_t> ranked = s.members;
        std::stable_sort(ranked.begin(), ranked.end(),
                         [&](std::size_t a, std::size_t b) { return *population[a].fitness > *population[b].fitness; });
        s.representative = population[ranked.front()];
        s.members.clear();
        const std::size_t quota = quotas[si];
        if (quota == 0) continue;

        const auto n_parents = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(config.survival_threshold * static_cast<double>(ranked.size()) - 1e-12)));
        const std::vector<std::size_t> parents(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(n_parents, ranked.size())));

        std::size_t produced = 0;
        if (ranked.size() >= 3) {
            for (std::size_t e = 0; e < config.elitism && e < ranked.size() && produced < quota; ++e, ++produced) {
                out.population.push_back(population[ranked[e]]);
            }
        }
        for (; produced < quota; ++produced) {
            const CppnGenome& p1 = population[parents[pick_index(rng, parents)]];
            const CppnGenome& p2 = population[parents[pick_index(rng, parents)]];
            bool first_fitter = *p1.fitness > *p2.fitness;
            if (*p1.fitness == *p2.fitness) first_fitter = chance(rng, 0.5);
            CppnGenome child = crossover(p1, p2, first_fitter, rng);
            mutate(child, config, rng, tracker);
            out.population.push_back(std::move(child));
        }
        out.species.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------

NeatEngine::NeatEngine(NeatConfig config, IoSpec io) : config_(std::move(config)), io_(io), rng_(config_.seed)
{
    config_.validate();
    population_ = init_population(config_, io_, rng_, tracker_);
}

GenerationRecord NeatEngine::step(const GenomeEvaluator& evaluate)
{
    std::vector<std::size_t> pending;
    std::vector<CppnGenome> batch;
    for (std::size_t i = 0; i < population_.size(); ++i) {
        if (!population_[i].fitness) {
            pending.push_back(i);
            batch.push_back(population_[i]);
        }
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
    rec.champion_hidden_nodes = champion_->hidden_count();
    rec.champion_connections = champion_->enabled_conn_count();

    auto spec = speciate(population_, std::move(species_), config_, next_species_id_);
    rec.n_species = spec.species.size();
    auto next = reproduce(population_, std::move(spec.species), config_, io_, rng_, tracker_);
    rec.restarted = next.restarted;
    population_ = std::move(next.population);
    species_ = std::move(next.species);
    ++generation_;
    return rec;
}

std::vector<GenerationRecord> NeatEngine::run(const GenomeEvaluator& evaluate)
{
    std::vector<GenerationRecord> log;
    for (std::size_t g = 0; g < config_.generations; ++g) log.push_back(step(evaluate));
    return log;
}

}  // namespace voxevo
