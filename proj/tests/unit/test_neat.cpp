#include "voxevo/neat.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace voxevo;

namespace {

CppnGenome with_weights(CppnGenome g, double w)
{
    for (auto& c : g.conns) c.weight = w;
    return g;
}

/// Structural sanity beyond check_genome: no dangling or duplicate pairs.
bool valid(const CppnGenome& g)
{
    try {
        check_genome(g);
    } catch (const GenomeError&) {
        return false;
    }
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (const auto& c : g.conns)
        if (!pairs.emplace(c.from, c.to).second) return false;
    return true;
}

}  // namespace

TEST_SUITE("neat")
{
    TEST_CASE("config validation")
    {
        NeatConfig c;
        CHECK_NOTHROW(c.validate());
        c.p_add_conn = 1.5;
        CHECK_THROWS(c.validate());
        c = NeatConfig{};
        c.pop_size = 1;
        CHECK_THROWS(c.validate());
        c = NeatConfig{};
        c.compat_threshold = 0;
        CHECK_THROWS(c.validate());
    }

    TEST_CASE("initial population is minimal and shares innovations")
    {
        NeatConfig c;
        Rng rng(1);
        InnovationTracker tracker;
        const auto pop = init_population(c, {4, 1}, rng, tracker);
        REQUIRE(pop.size() == 50);
        for (const auto& g : pop) {
            CHECK(g.nodes.size() == 5);
            CHECK(g.conns.size() == 4);
            CHECK(g.hidden_count() == 0);
            CHECK(g.enabled_conn_count() == 4);
            for (std::size_t i = 0; i < 4; ++i) CHECK(g.conns[i].innovation == pop[0].conns[i].innovation);
            for (const auto& cg : g.conns) CHECK(std::abs(cg.weight) <= 1.0);
            CHECK(g.find_node(4)->activation == Activation::Identity);
        }
        Rng rng2(1);
        InnovationTracker t2;
        CHECK(init_population(c, {4, 1}, rng2, t2) == pop);

        NeatConfig small;
        small.pop_size = 2;
        InnovationTracker t3;
        for (const auto& g : init_population(small, {1, 1}, rng, t3)) CHECK(g.conns.size() == 1);
    }

    TEST_CASE("compatibility distance")
    {
        const NeatConfig c;
        const auto g1 = with_weights(make_minimal_genome(4, 1), 0.3);
        CHECK(compatibility_distance(g1, g1, c) == 0.0);

        auto g2 = g1;
        g2.nodes.push_back({5, NodeRole::Hidden, Activation::Relu, 0});
        g2.add_conn({10, 0, 5, 0.3, true});
        CHECK(compatibility_distance(g1, g2, c) == doctest::Approx(0.2));

        const auto g3 = with_weights(make_minimal_genome(4, 1), 1.3);
        CHECK(compatibility_distance(g1, g3, c) == doctest::Approx(0.5));
    }

    TEST_CASE("speciation")
    {
        NeatConfig c;
        int next_id = 1;
        std::vector<CppnGenome> same(6, with_weights(make_minimal_genome(4, 1), 0.1));
        CHECK(speciate(same, {}, c, next_id).species.size() == 1);

        // two clusters 10 apart in weight space: 0.5 * 20 = 10
        std::vector<CppnGenome> two;
        for (int i = 0; i < 4; ++i) two.push_back(with_weights(make_minimal_genome(4, 1), -10));
        for (int i = 0; i < 4; ++i) two.push_back(with_weights(make_minimal_genome(4, 1), 10));
        CHECK(compatibility_distance(two[0], two[4], c) == doctest::Approx(10.0));
        next_id = 1;
        const auto res = speciate(two, {}, c, next_id);
        REQUIRE(res.species.size() == 2);
        CHECK(res.species[0].members == std::vector<std::size_t>{0, 1, 2, 3});
        CHECK(res.species[1].members == std::vector<std::size_t>{4, 5, 6, 7});
    }

    TEST_CASE("stagnant species are eliminated while more than two remain")
    {
        NeatConfig c;
        std::vector<CppnGenome> pop;
        for (double w : {-20.0, 0.0, 20.0}) {
            auto g = with_weights(make_minimal_genome(4, 1), w);
            g.fitness = 1.0;
            pop.push_back(g);
        }
        std::vector<Species> prev;
        for (int i = 0; i < 3; ++i) {
            Species s;
            s.id = i + 1;
            s.representative = pop[static_cast<std::size_t>(i)];
            s.best_fitness_ever = 1.0;
            s.stagnation = i == 0 ? 25 : 0;
            prev.push_back(s);
        }
        int next_id = 4;
        const auto res = speciate(pop, prev, c, next_id);
        CHECK(res.eliminated == std::vector<int>{1});
        REQUIRE(res.species.size() == 2);
        for (const auto& s : res.species) CHECK(s.id != 1);

        // with only two species alive nothing is removed
        std::vector<CppnGenome> pair(pop.begin(), pop.begin() + 2);
        std::vector<Species> prev2(prev.begin(), prev.begin() + 2);
        CHECK(speciate(pair, prev2, c, next_id).eliminated.empty());
    }

    TEST_CASE("apportion totals and proportions")
    {
        CHECK(apportion({1, 1, 2}, 8) == std::vector<std::size_t>{2, 2, 4});
        CHECK(apportion({0, 0}, 5) == std::vector<std::size_t>{3, 2});
        Rng rng(3);
        std::uniform_real_distribution<double> u(0, 10);
        for (int t = 0; t < 500; ++t) {
            std::vector<double> w(1 + t % 7);
            for (auto& x : w) x = u(rng);
            const auto q = apportion(w, 50);
            CHECK(std::accumulate(q.begin(), q.end(), std::size_t{0}) == 50);
        }
    }

    TEST_CASE("crossover of identical parents is the parent")
    {
        Rng rng(4);
        auto g = with_weights(make_minimal_genome(4, 1), 0.7);
        InnovationTracker tr(4, 5);
        const NeatConfig c;
        for (int i = 0; i < 20; ++i) mutate(g, c, rng, tr);
        CHECK(crossover(g, g, true, rng) == g);
        CHECK(crossover(g, g, false, rng) == g);
    }

    TEST_CASE("crossover keeps the fitter parent's disjoint genes")
    {
        Rng rng(5);
        auto small = with_weights(make_minimal_genome(4, 1), 0.1);
        auto big = small;
        big.nodes.push_back({5, NodeRole::Hidden, Activation::Gauss, 0});
        big.add_conn({7, 1, 5, 2.0, true});
        big.add_conn({8, 5, 4, 2.0, true});
        CHECK(crossover(small, big, true, rng).conns.size() == 4);
        const auto child = crossover(small, big, false, rng);
        CHECK(child.conns.size() == 6);
        CHECK(child.has_node(5));
    }

    TEST_CASE("structural mutations")
    {
        Rng rng(6);
        NeatConfig only_split;
        only_split.p_weight_mutate = 0;
        only_split.p_weight_replace = 0;
        only_split.p_mut_activation = only_split.p_add_conn = only_split.p_del_conn = 0;
        only_split.p_toggle_conn = only_split.p_del_node = 0;
        only_split.p_add_node = 1.0;
        auto g = make_minimal_genome(4, 1);
        InnovationTracker tr(4, 5);
        mutate(g, only_split, rng, tr);
        CHECK(g.hidden_count() == 1);
        CHECK(g.enabled_conn_count() == 5);
        CHECK(g.conns.size() - g.enabled_conn_count() == 1);
        CHECK(valid(g));

        NeatConfig only_delete = only_split;
        only_delete.p_add_node = 0;
        only_delete.p_del_node = 1.0;
        auto m = make_minimal_genome(4, 1);
        const auto before = m;
        mutate(m, only_delete, rng, tr);
        CHECK(m == before);
        mutate(g, only_delete, rng, tr);
        CHECK(g.hidden_count() == 0);
        CHECK(valid(g));
    }

    TEST_CASE("innovations are reused within a generation")
    {
        InnovationTracker tr(4, 5);
        const auto a = tr.connection(0, 7);
        CHECK(tr.connection(0, 7) == a);
        const auto b = tr.connection(1, 7);
        CHECK(b == a + 1);
        const auto n = tr.split_node(2);
        CHECK(tr.split_node(2) == n);
        tr.new_generation();
        CHECK(tr.connection(0, 7) > b);
        CHECK(tr.split_node(2) > n);
    }

    TEST_CASE("mutation fuzz keeps genomes valid")
    {
        const NeatConfig c;
        Rng rng(99);
        InnovationTracker tr(4, 5);
        std::size_t violations = 0;
        Innovation last_fresh = tr.next_innovation();
        for (int seq = 0; seq < 10000; ++seq) {
            auto g = make_minimal_genome(4, 1);
            const int steps = 1 + seq % 12;
            for (int s = 0; s < steps; ++s) {
                mutate(g, c, rng, tr);
                if (!valid(g)) ++violations;
                if (seq % 10 == 0) tr.new_generation();
            }
            CHECK(tr.next_innovation() >= last_fresh);
            last_fresh = tr.next_innovation();
            for (std::size_t i = 1; i < g.conns.size(); ++i)
                if (g.conns[i].innovation <= g.conns[i - 1].innovation) ++violations;
        }
        CHECK(violations == 0);
    }

    TEST_CASE("reproduction keeps population size and survival pool")
    {
        NeatConfig c;
        c.pop_size = 10;
        Rng rng(7);
        InnovationTracker tr;
        auto pop = init_population(c, {4, 1}, rng, tr);
        for (std::size_t i = 0; i < pop.size(); ++i) pop[i].fitness = static_cast<double>(i);
        Species s;
        s.id = 1;
        s.representative = pop[0];
        for (std::size_t i = 0; i < pop.size(); ++i) s.members.push_back(i);
        const auto next = reproduce(pop, {s}, c, {4, 1}, rng, tr);
        CHECK(next.population.size() == 10);
        // elite is the unmodified champion
        CHECK(next.population[0] == pop[9]);
        CHECK(next.population[0].fitness == 9.0);
        CHECK(std::ceil(c.survival_threshold * 10) == 2);

        // fuzz over random fitness vectors and species splits
        std::uniform_real_distribution<double> u(-5, 5);
        for (int t = 0; t < 200; ++t) {
            for (auto& g : pop) g.fitness = u(rng);
            std::vector<Species> sp(1 + t % 4);
            for (std::size_t i = 0; i < pop.size(); ++i) sp[i % sp.size()].members.push_back(i);
            for (std::size_t k = 0; k < sp.size(); ++k) {
                sp[k].id = static_cast<int>(k + 1);
                sp[k].representative = pop[k];
            }
            CHECK(reproduce(pop, sp, c, {4, 1}, rng, tr).population.size() == 10);
        }
        const auto restart = reproduce(pop, {}, c, {4, 1}, rng, tr);
        CHECK(restart.restarted);
        CHECK(restart.population.size() == 10);
    }

    TEST_CASE("engine is deterministic and best-so-far never drops")
    {
        NeatConfig c;
        c.pop_size = 20;
        c.generations = 15;
        c.seed = 11;
        // a smooth target: prefer genomes whose output at a few probes is near 1
        const GenomeEvaluator eval = [](const std::vector<CppnGenome>& batch) {
            std::vector<double> f;
            for (const auto& g : batch) {
                double err = 0;
                for (double x : {-1.0, 0.0, 1.0}) err += std::pow(activate(g, std::vector<double>{x, -x, 0.5, 1.0}) - 1.0, 2);
                f.push_back(-std::min(err, 1e6));
            }
            return f;
        };
        NeatEngine a(c, {4, 1}), b(c, {4, 1});
        const auto la = a.run(eval);
        const auto lb = b.run(eval);
        CHECK(la == lb);
        CHECK(*a.champion() == *b.champion());
        REQUIRE(la.size() == 15);
        for (std::size_t i = 1; i < la.size(); ++i) CHECK(la[i].best_fitness >= la[i - 1].best_fitness);
        CHECK(a.population().size() == 20);
        CHECK(la[0].champion_hidden_nodes == 0u);
    }
}
