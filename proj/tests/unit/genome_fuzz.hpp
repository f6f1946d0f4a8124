#pragma once

// Random structurally valid CPPN genomes for fuzz tests.

#include "voxevo/cppn.hpp"

#include <random>

namespace voxevo::testing {

/// n_in inputs, n_out outputs and up to max_hidden hidden nodes; every edge
/// that respects a random topological rank is present with probability 1/2.
inline CppnGenome random_genome(std::mt19937_64& rng, std::size_t n_in, std::size_t n_out, std::size_t max_hidden)
{
    std::uniform_real_distribution<double> w(-3.0, 3.0);
    std::uniform_int_distribution<std::size_t> act(0, kActivationCount - 1);
    std::uniform_int_distribution<std::size_t> hid(0, max_hidden);
    std::bernoulli_distribution coin(0.5), enabled(0.8);

    CppnGenome g = make_minimal_genome(n_in, n_out);
    g.conns.clear();
    for (auto& n : g.nodes)
        if (n.role == NodeRole::Output) n.bias = w(rng);
    const std::size_t h = hid(rng);
    NodeId next = static_cast<NodeId>(n_in + n_out);
    std::vector<NodeId> hidden;
    for (std::size_t i = 0; i < h; ++i) {
        g.nodes.push_back({next, NodeRole::Hidden, kAllActivations[act(rng)], w(rng)});
        hidden.push_back(next++);
    }
    // rank: inputs < hidden (in list order) < outputs
    std::vector<NodeId> order;
    for (std::size_t i = 0; i < n_in; ++i) order.push_back(static_cast<NodeId>(i));
    for (auto id : hidden) order.push_back(id);
    for (std::size_t o = 0; o < n_out; ++o) order.push_back(static_cast<NodeId>(n_in + o));
    auto is_input = [&](NodeId id) { return id < static_cast<NodeId>(n_in); };
    auto is_output = [&](NodeId id) { return id >= static_cast<NodeId>(n_in) && id < static_cast<NodeId>(n_in + n_out); };
    Innovation innov = 0;
    for (std::size_t a = 0; a < order.size(); ++a)
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            const NodeId from = order[a], to = order[b];
            if (is_input(to) || is_output(from)) continue;
            if (coin(rng)) g.conns.push_back({innov++, from, to, w(rng), enabled(rng)});
        }
    return g;
}

}  // namespace voxevo::testing
