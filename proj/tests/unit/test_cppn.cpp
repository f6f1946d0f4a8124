#include "voxevo/cppn.hpp"

#include "genome_fuzz.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace voxevo;

namespace {

/// Recursive graph walk straight off the gene lists.
double interpret(const CppnGenome& g, const std::vector<double>& inputs, NodeId node)
{
    const NodeGene* n = g.find_node(node);
    if (n->role == NodeRole::Input) return inputs.at(static_cast<std::size_t>(node));
    double sum = n->bias;
    for (const auto& c : g.conns)
        if (c.enabled && c.to == node) sum += c.weight * interpret(g, inputs, c.from);
    return apply_activation(n->activation, sum);
}

double interpret_output(const CppnGenome& g, const std::vector<double>& inputs, std::size_t k = 0)
{
    return interpret(g, inputs, static_cast<NodeId>(g.input_count() + k));
}

VoxelGrid mixed_grid()
{
    return parse_morphology("dims 3 2 1\n131\n310\n");
}

}  // namespace

TEST_SUITE("cppn")
{
    TEST_CASE("activation library")
    {
        CHECK(kAllActivations.size() == 23);
        CHECK(apply_activation(Activation::Sine, 0.0) == 0.0);
        CHECK(apply_activation(Activation::Sine, 0.5) == doctest::Approx(1.0));
        CHECK(apply_activation(Activation::Sigmoid, 0.0) == 0.5);
        CHECK(apply_activation(Activation::Gauss, 1.0) == doctest::Approx(std::exp(-5.0)));
        CHECK(apply_activation(Activation::Gauss, 1.0) == doctest::Approx(0.0067).epsilon(0.01));
        CHECK(apply_activation(Activation::Clamped, 3.0) == 1.0);
        CHECK(apply_activation(Activation::Square, 20.0) == 100.0);
        CHECK(apply_activation(Activation::Cube, -20.0) == -1000.0);
        CHECK(apply_activation(Activation::Exp, 50.0) == doctest::Approx(std::exp(10.0)));
        CHECK(apply_activation(Activation::Hat, 0.25) == 0.75);
        CHECK(apply_activation(Activation::Relu, -2.0) == 0.0);
        CHECK(apply_activation(Activation::Lelu, -2.0) == doctest::Approx(-0.01));
        CHECK(apply_activation(Activation::Elu, -1.0) == doctest::Approx(std::exp(-1.0) - 1.0));
        CHECK(apply_activation(Activation::Selu, 1.0) == doctest::Approx(1.0507009873554805));
        CHECK(apply_activation(Activation::Softplus, 0.0) == doctest::Approx(0.2 * std::log(2.0)));
        CHECK(apply_activation(Activation::Tanh, 0.4) == doctest::Approx(std::tanh(1.0)));
        CHECK(apply_activation(Activation::SqrtAbs, -4.0) == 2.0);
        CHECK(apply_activation(Activation::NegSqrtAbs, -4.0) == -2.0);
        CHECK(std::isfinite(apply_activation(Activation::Inverse, 0.0)));
        CHECK(std::isfinite(apply_activation(Activation::Log, 0.0)));
        for (const auto a : kAllActivations) {
            CHECK(activation_from_name(activation_name(a)) == a);
            for (double v : {-1e6, -3.0, -1e-9, 0.0, 1e-9, 0.7, 1e6}) CHECK(std::isfinite(apply_activation(a, v)));
        }
        CHECK_FALSE(activation_from_name("cosine"));
    }

    TEST_CASE("minimal genome evaluation")
    {
        auto g = make_minimal_genome(4, 1);
        CHECK(g.nodes.size() == 5);
        CHECK(g.conns.size() == 4);
        CHECK(activate(g, std::vector<double>{0.3, -0.2, 0.9, 3.0}) == 0.0);
        for (auto& c : g.conns) c.weight = 1.0;
        CHECK(activate(g, std::vector<double>{0.5, -0.5, 0.25, 1.0}) == 1.25);
        g.conns[1].enabled = false;  // drops the -0.5 term
        CHECK(activate(g, std::vector<double>{0.5, -0.5, 0.25, 1.0}) == 1.75);
    }

    TEST_CASE("hidden sine node matches the interpreter")
    {
        auto g = make_minimal_genome(4, 1);
        for (auto& c : g.conns) c.enabled = false;
        g.nodes.push_back({5, NodeRole::Hidden, Activation::Sine, 0.0});
        g.add_conn({4, 0, 5, 1.0, true});
        g.add_conn({5, 5, 4, 1.0, true});
        const std::vector<double> in{std::numbers::pi / 2, 0, 0, 1};
        CHECK(std::abs(activate(g, in) - interpret_output(g, in)) <= 1e-12);
        CHECK(activate(g, in) == doctest::Approx(std::sin(std::numbers::pi * std::numbers::pi / 2)));
    }

    TEST_CASE("compiled evaluation equals the interpreter on random small genomes")
    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto g = testing::random_genome(rng, 4, 1, 3);  // at most 8 nodes
            REQUIRE(g.nodes.size() <= 8);
            REQUIRE_NOTHROW(check_genome(g));
            const CompiledCppn net(g);
            for (int q = 0; q < 4; ++q) {
                const std::vector<double> in{u(rng), u(rng), u(rng), q % 2 ? 3.0 : 1.0};
                const double a = net.evaluate1(in);
                const double b = interpret_output(g, in);
                CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
            }
        }
    }

    TEST_CASE("disabling a zero-weight connection never changes outputs")
    {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 200; ++trial) {
            auto g = testing::random_genome(rng, 4, 1, 3);
            if (g.conns.empty()) continue;
            auto& c = g.conns[trial % g.conns.size()];
            c.weight = 0.0;
            c.enabled = true;
            const std::vector<double> in{0.1, -0.7, 0.4, 3.0};
            const double before = activate(g, in);
            c.enabled = false;
            CHECK(activate(g, in) == before);
        }
    }

    TEST_CASE("phase field queries")
    {
        const auto grid = mixed_grid();
        const auto zero = query_phase_field(make_minimal_genome(4, 1), grid);
        for (double v : zero.values()) CHECK(v == 0.0);

        auto big = make_minimal_genome(4, 1);
        big.nodes[4].bias = 100.0;
        const auto top = query_phase_field(big, grid);
        for (std::size_t i = 0; i < grid.dims().volume(); ++i)
            CHECK(top.at(i) == (grid.at(i) == Material::Empty ? 0.0 : kMaxPhase));

        auto neg = make_minimal_genome(4, 1);
        neg.conns[3].weight = -10.0;  // out = -10 m
        const auto low = query_phase_field(neg, grid);
        for (std::size_t i = 0; i < grid.dims().volume(); ++i)
            if (grid.at(i) != Material::Empty) CHECK(low.at(i) == -kMaxPhase);

        CHECK(clamp_phase(std::nan("")) == 0.0);
    }

    TEST_CASE("phase field clamping fuzz")
    {
        std::mt19937_64 rng(77);
        const std::vector<VoxelGrid> grids{mixed_grid(), generate_benchmark(1, 42), generate_benchmark(9, 42)};
        for (int trial = 0; trial < 1000; ++trial) {
            auto g = testing::random_genome(rng, 4, 1, 4);
            for (auto& c : g.conns) c.weight *= 5;
            for (const auto& grid : grids) {
                const auto f = query_phase_field(g, grid);
                for (double v : f.values()) REQUIRE((v >= -kMaxPhase && v <= kMaxPhase));
            }
        }
    }

    TEST_CASE("invariant checks")
    {
        auto g = make_minimal_genome(4, 1);
        CHECK_NOTHROW(check_genome(g));
        auto cyc = g;
        cyc.nodes.push_back({5, NodeRole::Hidden, Activation::Relu, 0});
        cyc.nodes.push_back({6, NodeRole::Hidden, Activation::Relu, 0});
        cyc.add_conn({4, 5, 6, 1, true});
        CHECK(creates_cycle(cyc.conns, 6, 5));
        CHECK_FALSE(creates_cycle(cyc.conns, 5, 4));
        cyc.add_conn({5, 6, 5, 1, false});  // disabled edges still count
        CHECK_THROWS_WITH_AS(check_genome(cyc), doctest::Contains("cycle"), GenomeError);

        auto into_input = g;
        into_input.add_conn({4, 4, 0, 1, true});
        CHECK_THROWS_AS(check_genome(into_input), GenomeError);

        auto dup = g;
        dup.add_conn({9, 0, 4, 1, true});
        CHECK_THROWS_AS(check_genome(dup), GenomeError);

        auto biased_input = g;
        biased_input.nodes[0].bias = 1.0;
        CHECK_THROWS_AS(check_genome(biased_input), GenomeError);
    }

    TEST_CASE("serialization round trip")
    {
        std::mt19937_64 rng(8);
        for (int i = 0; i < 100; ++i) {
            auto g = testing::random_genome(rng, 4, 2, 5);
            g.fitness = std::uniform_real_distribution<double>(-1, 1)(rng);
            const auto back = parse_genome(serialize_genome(g));
            CHECK(back == g);
            CHECK(back.fitness == g.fitness);
        }
        CHECK_THROWS_AS(parse_genome("node 0 input identity 0\nbogus\n"), GenomeError);
        CHECK_THROWS_AS(parse_genome("node 0 input identity 0\nnode 1 output identity 0\nconn 0 0 1 1.0 2\n"), GenomeError);
    }
}
