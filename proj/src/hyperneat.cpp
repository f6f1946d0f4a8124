#include "voxevo/hyperneat.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voxevo {

void SubstrateSpec::validate() const
{
    if (hidden_layers < 3 || hidden_layers > 10)
        throw std::invalid_argument(fmt::format("hyperneat.hidden_layers must be in [3, 10], got {}", hidden_layers));
    if (neurons_per_layer < 3 || neurons_per_layer > 10)
        throw std::invalid_argument(fmt::format("hyperneat.neurons_per_layer must be in [3, 10], got {}", neurons_per_layer));
    if (!(weight_threshold >= 0)) throw std::invalid_argument("hyperneat.weight_threshold must be >= 0");
    if (!(weight_scale > 0)) throw std::invalid_argument("hyperneat.weight_scale must be > 0");
}

std::size_t SubstrateLayout::node_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
}

namespace {

std::vector<SubstrateNode> row(int count, double y)
{
    std::vector<SubstrateNode> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double x = count == 1 ? 0.0 : -1.0 + 2.0 * i / (count - 1);
        out[static_cast<std::size_t>(i)] = {x, y};
    }
    return out;
}

}  // namespace

SubstrateLayout build_substrate(const SubstrateSpec& spec)
{
    spec.validate();
    SubstrateLayout layout{spec, {}};
    layout.layers.push_back(row(4, -1.0));
    for (int j = 1; j <= spec.hidden_layers; ++j)
        layout.layers.push_back(row(spec.neurons_per_layer, -1.0 + 2.0 * j / (spec.hidden_layers + 1)));
    layout.layers.push_back(row(1, 1.0));
    return layout;
}

double paint_value(double raw, const SubstrateSpec& spec) noexcept
{
    const double mag = std::abs(raw);
    if (!(mag >= spec.weight_threshold) || mag == 0.0) return 0.0;  // NaN paints as 0
    return std::copysign(std::min(mag - spec.weight_threshold, 1.0) * spec.weight_scale, raw);
}

SubstrateNet paint_weights(const CppnGenome& cppn, const SubstrateLayout& layout)
{
    if (cppn.input_count() != kHyperIo.inputs || cppn.output_count() != kHyperIo.outputs)
        throw GenomeError(fmt::format("substrate painting needs a 4-input/2-output CPPN, got {}/{}", cppn.input_count(),
                                      cppn.output_count()));
    const CompiledCppn net(cppn);
    const auto& spec = layout.spec;
    SubstrateNet out;
    for (const auto& l : layout.layers) out.widths.push_back(l.size());

    std::array<double, 4> in{};
    std::array<double, 2> res{};
    for (std::size_t l = 0; l + 1 < layout.layers.size(); ++l) {
        const auto& src = layout.layers[l];
        const auto& dst = layout.layers[l + 1];
        std::vector<double> w(src.size() * dst.size());
        std::vector<double> b(dst.size());
        for (std::size_t t = 0; t < dst.size(); ++t) {
            for (std::size_t s = 0; s < src.size(); ++s) {
                in = {src[s].x, src[s].y, dst[t].x, dst[t].y};
                net.evaluate(in, res);
                w[t * src.size() + s] = paint_value(res[0], spec);
            }
            in = {dst[t].x, dst[t].y, 0.0, 0.0};
            net.evaluate(in, res);
            b[t] = paint_value(res[1], spec);
        }
        out.weights.push_back(std::move(w));
        out.biases.push_back(std::move(b));
    }
    return out;
}

double SubstrateNet::activate(const std::array<double, 4>& inputs) const
{
    std::vector<double> cur(inputs.begin(), inputs.end());
    std::vector<double> next;
    const std::size_t n_links = weights.size();
    for (std::size_t l = 0; l < n_links; ++l) {
        const std::size_t n_src = widths[l];
        const std::size_t n_dst = widths[l + 1];
        next.assign(n_dst, 0.0);
        for (std::size_t t = 0; t < n_dst; ++t) {
            double acc = biases[l][t];
            for (std::size_t s = 0; s < n_src; ++s) acc += weights[l][t * n_src + s] * cur[s];
            next[t] = (l + 1 == n_links) ? acc : std::max(0.0, acc);
        }
        cur.swap(next);
    }
    return clamp_phase(cur.at(0));
}

std::size_t SubstrateNet::connection_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](double v) { return v != 0.0; }));
    return n;
}

std::size_t SubstrateNet::active_hidden_count() const noexcept
{
    std::size_t n = 0;
    // hidden layers are 1..widths.size()-2
    for (std::size_t l = 1; l + 1 < widths.size(); ++l) {
        for (std::size_t node = 0; node < widths[l]; ++node) {
            bool touched = false;
            const auto& in_w = weights[l - 1];
            for (std::size_t s = 0; s < widths[l - 1] && !touched; ++s) touched = in_w[node * widths[l - 1] + s] != 0.0;
            const auto& out_w = weights[l];
            for (std::size_t t = 0; t < widths[l + 1] && !touched; ++t) touched = out_w[t * widths[l] + node] != 0.0;
            if (touched) ++n;
        }
    }
    return n;
}

double substrate_activate(const SubstrateNet& net, const MaterialInputs& in) { return net.activate(in.as_array()); }

PhaseField query_phase_field_net(const SubstrateNet& net, const VoxelGrid& grid)
{
    const Dims d = grid.dims();
    PhaseField field(d);
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                if (grid.at(x, y, z) == Material::Empty) continue;
                field.set(d.index(x, y, z), substrate_activate(net, material_inputs(grid, x, y, z)));
            }
    return field;
}

PhaseField query_phase_field_hyper(const CppnGenome& cppn, const SubstrateLayout& layout, const VoxelGrid& grid)
{
    return query_phase_field_net(paint_weights(cppn, layout), grid);
}

}  // namespace voxevo
