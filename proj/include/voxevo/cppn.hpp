#pragma once

#include "voxevo/activation.hpp"
#include "voxevo/morphology.hpp"
#include "voxevo/physics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace voxevo {

using NodeId = std::int64_t;
using Innovation = std::int64_t;

enum class NodeRole { Input, Output, Hidden };

std::string_view role_name(NodeRole r) noexcept;

struct NodeGene {
    NodeId id = 0;
    NodeRole role = NodeRole::Hidden;
    Activation activation = Activation::Identity;
    double bias = 0.0;

    friend bool operator==(const NodeGene&, const NodeGene&) = default;
};

struct ConnGene {
    Innovation innovation = 0;
    NodeId from = 0;
    NodeId to = 0;
    double weight = 0.0;
    bool enabled = true;

    friend bool operator==(const ConnGene&, const ConnGene&) = default;
};

class GenomeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// NEAT genome of a feedforward CPPN. Input nodes carry ids 0..n_in-1 and
/// output nodes n_in..n_in+n_out-1; connections are kept sorted by innovation.
struct CppnGenome {
    std::vector<NodeGene> nodes;
    std::vector<ConnGene> conns;
    std::optional<double> fitness;

    std::size_t input_count() const noexcept;
    std::size_t output_count() const noexcept;
    std::size_t hidden_count() const noexcept;
    std::size_t enabled_conn_count() const noexcept;

    const NodeGene* find_node(NodeId id) const noexcept;
    NodeGene* find_node(NodeId id) noexcept;
    const ConnGene* find_conn(NodeId from, NodeId to) const noexcept;
    bool has_node(NodeId id) const noexcept { return find_node(id) != nullptr; }

    /// Inserts keeping innovation order.
    void add_conn(const ConnGene& c);

    /// Structural equality, ignoring fitness.
    friend bool operator==(const CppnGenome& a, const CppnGenome& b)
    {
        return a.nodes == b.nodes && a.conns == b.conns;
    }
};

/// Genome with the given I/O signature, fully connected inputs->outputs,
/// identity outputs, every weight and bias equal to `value`.
CppnGenome make_minimal_genome(std::size_t n_inputs, std::size_t n_outputs, double value = 0.0);

/// True when adding from->to (enabled or not) would close a directed cycle.
bool creates_cycle(const std::vector<ConnGene>& conns, NodeId from, NodeId to);

/// Throws GenomeError describing the first violated invariant.
void check_genome(const CppnGenome& g);

/// Topologically sorted, flattened evaluator for one genome.
class CompiledCppn {
public:
    explicit CompiledCppn(const CppnGenome& genome);

    std::size_t input_count() const noexcept { return n_inputs_; }
    std::size_t output_count() const noexcept { return outputs_.size(); }

    /// Writes raw (unclamped) output values.
    void evaluate(std::span<const double> inputs, std::span<double> outputs) const;
    double evaluate1(std::span<const double> inputs) const;

private:
    struct Incoming {
        std::size_t source;
        double weight;
    };
    struct Step {
        std::size_t slot;
        Activation activation;
        double bias;
        std::size_t first_in;
        std::size_t in_count;
    };

    std::size_t n_inputs_ = 0;
    std::size_t n_slots_ = 0;
    std::vector<Step> steps_;
    std::vector<Incoming> incoming_;
    std::vector<std::size_t> outputs_;
    mutable std::vector<double> values_;  // per-thread use only; copy the object to share
};

/// Raw value of the single output node. Throws GenomeError on a cycle.
double activate(const CppnGenome& genome, std::span<const double> inputs);

/// Phase offsets for every occupied voxel, clamped to [-2pi, 2pi]; empty voxels get 0.
PhaseField query_phase_field(const CppnGenome& genome, const VoxelGrid& grid);

double clamp_phase(double v) noexcept;

/// Text records: `node id role activation bias` and
/// `conn innov from to weight enabled`, one per line.
std::string serialize_genome(const CppnGenome& g);
CppnGenome parse_genome(std::string_view text);

}  // namespace voxevo
