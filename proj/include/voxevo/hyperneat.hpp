#pragma once

#include "voxevo/cppn.hpp"
#include "voxevo/morphology.hpp"
#include "voxevo/neat.hpp"
#include "voxevo/physics.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace voxevo {

struct SubstrateSpec {
    int hidden_layers = 3;
    int neurons_per_layer = 4;
    double weight_threshold = 0.2;
    double weight_scale = 3.0;

    void validate() const;
    friend bool operator==(const SubstrateSpec&, const SubstrateSpec&) = default;
};

struct SubstrateNode {
    double x = 0;
    double y = 0;
};

/// Node coordinates grouped by layer: inputs, hidden layers, output.
struct SubstrateLayout {
    SubstrateSpec spec;
    std::vector<std::vector<SubstrateNode>> layers;

    std::size_t node_count() const noexcept;
};

SubstrateLayout build_substrate(const SubstrateSpec& spec);

/// Painted feedforward net. weights[l] is row-major [to][from] between
/// layers l and l+1; biases[l] belongs to layer l+1.
struct SubstrateNet {
    std::vector<std::size_t> widths;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    double activate(const std::array<double, 4>& inputs) const;

    std::size_t connection_count() const noexcept;
    /// Hidden nodes with at least one nonzero incident weight.
    std::size_t active_hidden_count() const noexcept;

    friend bool operator==(const SubstrateNet&, const SubstrateNet&) = default;
};

/// Threshold and scale rule applied to a raw CPPN output.
double paint_value(double raw, const SubstrateSpec& spec) noexcept;

/// CPPN signature for painting: inputs (x1, y1, x2, y2), outputs (weight, bias).
inline constexpr IoSpec kHyperIo{4, 2};

SubstrateNet paint_weights(const CppnGenome& cppn, const SubstrateLayout& layout);

double substrate_activate(const SubstrateNet& net, const MaterialInputs& in);

PhaseField query_phase_field_hyper(const CppnGenome& cppn, const SubstrateLayout& layout, const VoxelGrid& grid);
PhaseField query_phase_field_net(const SubstrateNet& net, const VoxelGrid& grid);

}  // namespace voxevo
