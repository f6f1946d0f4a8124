#include "voxevo/cppn.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace voxevo {

std::string_view role_name(NodeRole r) noexcept
{
    switch (r) {
    case NodeRole::Input: return "input";
    case NodeRole::Output: return "output";
    case NodeRole::Hidden: return "hidden";
    }
    return "hidden";
}

namespace {

std::optional<NodeRole> role_from_name(std::string_view s)
{
    if (s == "input") return NodeRole::Input;
    if (s == "output") return NodeRole::Output;
    if (s == "hidden") return NodeRole::Hidden;
    return std::nullopt;
}

}  // namespace

std::size_t CppnGenome::input_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const NodeGene& n) { return n.role == NodeRole::Input; }));
}

std::size_t CppnGenome::output_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const NodeGene& n) { return n.role == NodeRole::Output; }));
}

std::size_t CppnGenome::hidden_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const NodeGene& n) { return n.role == NodeRole::Hidden; }));
}

std::size_t CppnGenome::enabled_conn_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(conns.begin(), conns.end(), [](const ConnGene& c) { return c.enabled; }));
}

const NodeGene* CppnGenome::find_node(NodeId id) const noexcept
{
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const NodeGene& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

NodeGene* CppnGenome::find_node(NodeId id) noexcept
{
    auto it = std::find_if(nodes.begin(), nodes.end(), [id](const NodeGene& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

const ConnGene* CppnGenome::find_conn(NodeId from, NodeId to) const noexcept
{
    auto it = std::find_if(conns.begin(), conns.end(), [&](const ConnGene& c) { return c.from == from && c.to == to; });
    return it == conns.end() ? nullptr : &*it;
}

void CppnGenome::add_conn(const ConnGene& c)
{
    auto it = std::lower_bound(conns.begin(), conns.end(), c.innovation,
                               [](const ConnGene& g, Innovation inn) { return g.innovation < inn; });
    conns.insert(it, c);
}

CppnGenome make_minimal_genome(std::size_t n_inputs, std::size_t n_outputs, double value)
{
    CppnGenome g;
    for (std::size_t i = 0; i < n_inputs; ++i) {
        g.nodes.push_back({static_cast<NodeId>(i), NodeRole::Input, Activation::Identity, 0.0});
    }
    for (std::size_t o = 0; o < n_outputs; ++o) {
        g.nodes.push_back({static_cast<NodeId>(n_inputs + o), NodeRole::Output, Activation::Identity, value});
    }
    Innovation inn = 0;
    for (std::size_t o = 0; o < n_outputs; ++o) {
        for (std::size_t i = 0; i < n_inputs; ++i) {
            g.conns.push_back({inn++, static_cast<NodeId>(i), static_cast<NodeId>(n_inputs + o), value, true});
        }
    }
    return g;
}

bool creates_cycle(const std::vector<ConnGene>& conns, NodeId from, NodeId to)
{
    if (from == to) return true;
    // Cycle iff `from` is reachable from `to`.
    std::unordered_map<NodeId, std::vector<NodeId>> out;
    for (const auto& c : conns) out[c.from].push_back(c.to);
    std::vector<NodeId> stack{to};
    std::set<NodeId> seen{to};
    while (!stack.empty()) {
        const NodeId cur = stack.back();
        stack.pop_back();
        if (cur == from) return true;
        auto it = out.find(cur);
        if (it == out.end()) continue;
        for (const NodeId nxt : it->second) {
            if (seen.insert(nxt).second) stack.push_back(nxt);
        }
    }
    return false;
}

void check_genome(const CppnGenome& g)
{
    const std::size_t n_in = g.input_count();
    const std::size_t n_out = g.output_count();
    std::set<NodeId> ids;
    for (const auto& n : g.nodes) {
        if (!ids.insert(n.id).second) throw GenomeError(fmt::format("duplicate node id {}", n.id));
        const bool input_slot = n.id >= 0 && static_cast<std::size_t>(n.id) < n_in;
        const bool output_slot = n.id >= static_cast<NodeId>(n_in) && static_cast<std::size_t>(n.id) < n_in + n_out;
        if ((n.role == NodeRole::Input) != input_slot) throw GenomeError(fmt::format("node {} has a misplaced input role", n.id));
        if ((n.role == NodeRole::Output) != output_slot) throw GenomeError(fmt::format("node {} has a misplaced output role", n.id));
        if (n.role == NodeRole::Input && (n.activation != Activation::Identity || n.bias != 0.0)) {
            throw GenomeError(fmt::format("input node {} must be identity with zero bias", n.id));
        }
        if (!std::isfinite(n.bias)) throw GenomeError(fmt::format("node {} has a non-finite bias", n.id));
    }
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (std::size_t i = 0; i < g.conns.size(); ++i) {
        const auto& c = g.conns[i];
        if (i > 0 && !(g.conns[i - 1].innovation < c.innovation)) {
            throw GenomeError(fmt::format("innovation numbers not strictly increasing at {}", c.innovation));
        }
        if (!ids.count(c.from) || !ids.count(c.to)) throw GenomeError(fmt::format("conn {} references a missing node", c.innovation));
        if (g.find_node(c.to)->role == NodeRole::Input) throw GenomeError(fmt::format("conn {} feeds an input node", c.innovation));
        if (!pairs.insert({c.from, c.to}).second) throw GenomeError(fmt::format("duplicate connection {}->{}", c.from, c.to));
        if (!std::isfinite(c.weight)) throw GenomeError(fmt::format("conn {} has a non-finite weight", c.innovation));
    }
    // Kahn over all connections, enabled or not.
    std::map<NodeId, int> indeg;
    std::map<NodeId, std::vector<NodeId>> out;
    for (const auto id : ids) indeg[id] = 0;
    for (const auto& c : g.conns) {
        ++indeg[c.to];
        out[c.from].push_back(c.to);
    }
    std::vector<NodeId> ready;
    for (const auto& [id, d] : indeg)
        if (d == 0) ready.push_back(id);
    std::size_t visited = 0;
    while (!ready.empty()) {
        const NodeId cur = ready.back();
        ready.pop_back();
        ++visited;
        for (const NodeId nxt : out[cur])
            if (--indeg[nxt] == 0) ready.push_back(nxt);
    }
    if (visited != ids.size()) throw GenomeError("cycle-detected");
}

CompiledCppn::CompiledCppn(const CppnGenome& genome)
{
    std::unordered_map<NodeId, std::size_t> slot;
    std::vector<const NodeGene*> by_slot;
    // Inputs occupy the first slots in id order.
    std::vector<const NodeGene*> inputs;
    for (const auto& n : genome.nodes)
        if (n.role == NodeRole::Input) inputs.push_back(&n);
    std::sort(inputs.begin(), inputs.end(), [](auto* a, auto* b) { return a->id < b->id; });
    for (auto* n : inputs) {
        slot[n->id] = by_slot.size();
        by_slot.push_back(n);
    }
    n_inputs_ = inputs.size();
    for (const auto& n : genome.nodes) {
        if (n.role != NodeRole::Input) {
            slot[n.id] = by_slot.size();
            by_slot.push_back(&n);
        }
    }
    n_slots_ = by_slot.size();

    std::vector<std::vector<Incoming>> in(n_slots_);
    std::vector<int> indeg(n_slots_, 0);
    std::vector<std::vector<std::size_t>> out(n_slots_);
    for (const auto& c : genome.conns) {
        if (!c.enabled) continue;
        auto fi = slot.find(c.from);
        auto ti = slot.find(c.to);
        if (fi == slot.end() || ti == slot.end()) throw GenomeError(fmt::format("conn {} references a missing node", c.innovation));
        in[ti->second].push_back({fi->second, c.weight});
        out[fi->second].push_back(ti->second);
        ++indeg[ti->second];
    }
    std::vector<std::size_t> ready;
    for (std::size_t s = n_slots_; s-- > 0;)
        if (indeg[s] == 0) ready.push_back(s);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const std::size_t cur = ready.back();
        ready.pop_back();
        order.push_back(cur);
        for (const std::size_t nxt : out[cur])
            if (--indeg[nxt] == 0) ready.push_back(nxt);
    }
    if (order.size() != n_slots_) throw GenomeError("cycle-detected");

    for (const std::size_t s : order) {
        const NodeGene* n = by_slot[s];
        if (n->role == NodeRole::Input) continue;
        steps_.push_back({s, n->activation, n->bias, incoming_.size(), in[s].size()});
        incoming_.insert(incoming_.end(), in[s].begin(), in[s].end());
    }
    std::vector<const NodeGene*> outs;
    for (const auto& n : genome.nodes)
        if (n.role == NodeRole::Output) outs.push_back(&n);
    std::sort(outs.begin(), outs.end(), [](auto* a, auto* b) { return a->id < b->id; });
    for (auto* n : outs) outputs_.push_back(slot[n->id]);
    values_.assign(n_slots_, 0.0);
}

void CompiledCppn::evaluate(std::span<const double> inputs, std::span<double> outputs) const
{
    if (inputs.size() != n_inputs_ || outputs.size() != outputs_.size()) {
        throw GenomeError(fmt::format("expected {} inputs and {} outputs, got {} and {}", n_inputs_, outputs_.size(),
                                      inputs.size(), outputs.size()));
    }
    std::copy(inputs.begin(), inputs.end(), values_.begin());
    for (const Step& st : steps_) {
        double sum = st.bias;
        for (std::size_t k = 0; k < st.in_count; ++k) {
            const Incoming& e = incoming_[st.first_in + k];
            sum += e.weight * values_[e.source];
        }
        values_[st.slot] = apply_activation(st.activation, sum);
    }
    for (std::size_t o = 0; o < outputs_.size(); ++o) outputs[o] = values_[outputs_[o]];
}

double CompiledCppn::evaluate1(std::span<const double> inputs) const
{
    double out = 0;
    evaluate(inputs, std::span<double>(&out, 1));
    return out;
}

double activate(const CppnGenome& genome, std::span<const double> inputs)
{
    const CompiledCppn net(genome);
    return net.evaluate1(inputs);
}

double clamp_phase(double v) noexcept
{
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, -kMaxPhase, kMaxPhase);
}

PhaseField query_phase_field(const CppnGenome& genome, const VoxelGrid& grid)
{
    const CompiledCppn net(genome);
    const Dims& d = grid.dims();
    PhaseField field(d);
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                if (grid.at(x, y, z) == Material::Empty) continue;
                const auto in = material_inputs(grid, x, y, z).as_array();
                field.set(d.index(x, y, z), clamp_phase(net.evaluate1(in)));
            }
    return field;
}

std::string serialize_genome(const CppnGenome& g)
{
    std::string out;
    if (g.fitness) out += fmt::format("fitness {:.17g}\n", *g.fitness);
    for (const auto& n : g.nodes) {
        out += fmt::format("node {} {} {} {:.17g}\n", n.id, role_name(n.role), activation_name(n.activation), n.bias);
    }
    for (const auto& c : g.conns) {
        out += fmt::format("conn {} {} {} {:.17g} {}\n", c.innovation, c.from, c.to, c.weight, c.enabled ? 1 : 0);
    }
    return out;
}

CppnGenome parse_genome(std::string_view text)
{
    CppnGenome g;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::istringstream rec(line);
        std::string kind;
        rec >> kind;
        auto bad = [&] { return GenomeError(fmt::format("genome line {}: malformed '{}'", lineno, line)); };
        if (kind == "node") {
            NodeGene n;
            std::string role, act;
            if (!(rec >> n.id >> role >> act >> n.bias)) throw bad();
            auto r = role_from_name(role);
            auto a = activation_from_name(act);
            if (!r || !a) throw bad();
            n.role = *r;
            n.activation = *a;
            g.nodes.push_back(n);
        } else if (kind == "conn") {
            ConnGene c;
            int enabled = 0;
            if (!(rec >> c.innovation >> c.from >> c.to >> c.weight >> enabled) || (enabled != 0 && enabled != 1)) throw bad();
            c.enabled = enabled == 1;
            g.conns.push_back(c);
        } else if (kind == "fitness") {
            double f = 0;
            if (!(rec >> f)) throw bad();
            g.fitness = f;
        } else {
            throw bad();
        }
        std::string extra;
        if (rec >> extra) throw bad();
    }
    std::sort(g.conns.begin(), g.conns.end(), [](const ConnGene& a, const ConnGene& b) { return a.innovation < b.innovation; });
    check_genome(g);
    return g;
}

}  // namespace voxevo
