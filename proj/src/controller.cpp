#include "voxevo/controller.hpp"

#include <fmt/format.h>

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace voxevo {

namespace {

constexpr std::array<std::string_view, 3> kKindNames{"neat_cppn", "hyperneat_net", "sga_matrix"};

}  // namespace

std::string_view controller_kind_name(ControllerKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<ControllerKind> controller_kind_from_name(std::string_view name) noexcept
{
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<ControllerKind>(i);
    return std::nullopt;
}

Controller Controller::neat(CppnGenome g)
{
    Controller c;
    c.kind = ControllerKind::NeatCppn;
    c.cppn = std::move(g);
    return c;
}

Controller Controller::hyperneat(CppnGenome g, SubstrateSpec spec)
{
    Controller c;
    c.kind = ControllerKind::HyperneatNet;
    c.cppn = std::move(g);
    c.substrate = spec;
    return c;
}

Controller Controller::sga(MatrixGenome m)
{
    Controller c;
    c.kind = ControllerKind::SgaMatrix;
    c.matrix = std::move(m);
    return c;
}

PhaseField Controller::phase_field(const VoxelGrid& grid) const
{
    switch (kind) {
    case ControllerKind::NeatCppn: return query_phase_field(cppn, grid);
    case ControllerKind::HyperneatNet: return query_phase_field_hyper(cppn, build_substrate(substrate), grid);
    case ControllerKind::SgaMatrix: {
        if (matrix.dims != grid.dims())
            throw std::invalid_argument(fmt::format("matrix controller is {}x{}x{} but the grid is {}x{}x{}", matrix.dims.nx,
                                                    matrix.dims.ny, matrix.dims.nz, grid.dims().nx, grid.dims().ny,
                                                    grid.dims().nz));
        PhaseField f(grid.dims());
        for (std::size_t i = 0; i < matrix.values.size(); ++i)
            if (grid.at(i) != Material::Empty) f.set(i, clamp_phase(matrix.values[i]));
        return f;
    }
    }
    throw std::logic_error("unknown controller kind");
}

std::optional<double> Controller::fitness() const { return kind == ControllerKind::SgaMatrix ? matrix.fitness : cppn.fitness; }

void Controller::set_fitness(std::optional<double> f)
{
    if (kind == ControllerKind::SgaMatrix)
        matrix.fitness = f;
    else
        cppn.fitness = f;
}

bool operator==(const Controller& a, const Controller& b)
{
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case ControllerKind::NeatCppn: return a.cppn == b.cppn;
    case ControllerKind::HyperneatNet: return a.cppn == b.cppn && a.substrate == b.substrate;
    case ControllerKind::SgaMatrix: return a.matrix == b.matrix;
    }
    return false;
}

std::string serialize_controller(const Controller& c)
{
    std::string out = fmt::format("controller {}\n", controller_kind_name(c.kind));
    switch (c.kind) {
    case ControllerKind::NeatCppn: out += serialize_genome(c.cppn); break;
    case ControllerKind::HyperneatNet:
        out += fmt::format("substrate {} {} {:.17g} {:.17g}\n", c.substrate.hidden_layers, c.substrate.neurons_per_layer,
                           c.substrate.weight_threshold, c.substrate.weight_scale);
        out += serialize_genome(c.cppn);
        break;
    case ControllerKind::SgaMatrix:
        out += fmt::format("matrix {} {} {}\n", c.matrix.dims.nx, c.matrix.dims.ny, c.matrix.dims.nz);
        if (c.matrix.fitness) out += fmt::format("fitness {:.17g}\n", *c.matrix.fitness);
        for (const double v : c.matrix.values) out += fmt::format("value {:.17g}\n", v);
        break;
    }
    return out;
}

Controller parse_controller(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty() && line.front() != '#') return true;
        }
        return false;
    };
    if (!next_line()) throw GenomeError("controller document is empty");
    std::istringstream head(line);
    std::string tag, kind_name;
    head >> tag >> kind_name;
    const auto kind = controller_kind_from_name(kind_name);
    if (tag != "controller" || !kind) throw GenomeError(fmt::format("expected 'controller <kind>', got '{}'", line));

    auto rest = [&] {
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return body;
    };

    Controller c;
    c.kind = *kind;
    switch (*kind) {
    case ControllerKind::NeatCppn: c.cppn = parse_genome(rest()); break;
    case ControllerKind::HyperneatNet: {
        if (!next_line()) throw GenomeError("missing substrate line");
        std::istringstream s(line);
        std::string t;
        if (!(s >> t >> c.substrate.hidden_layers >> c.substrate.neurons_per_layer >> c.substrate.weight_threshold >>
              c.substrate.weight_scale) ||
            t != "substrate")
            throw GenomeError(fmt::format("malformed substrate line '{}'", line));
        c.substrate.validate();
        c.cppn = parse_genome(rest());
        if (c.cppn.input_count() != kHyperIo.inputs || c.cppn.output_count() != kHyperIo.outputs)
            throw GenomeError("hyperneat controller needs a 4-input/2-output CPPN");
        break;
    }
    case ControllerKind::SgaMatrix: {
        if (!next_line()) throw GenomeError("missing matrix line");
        std::istringstream s(line);
        std::string t;
        Dims d{};
        if (!(s >> t >> d.nx >> d.ny >> d.nz) || t != "matrix" || d.nx <= 0 || d.ny <= 0 || d.nz <= 0)
            throw GenomeError(fmt::format("malformed matrix line '{}'", line));
        c.matrix.dims = d;
        while (next_line()) {
            std::istringstream r(line);
            double v = 0;
            std::string extra;
            if (!(r >> t >> v) || (r >> extra)) throw GenomeError(fmt::format("malformed matrix record '{}'", line));
            if (t == "fitness") {
                c.matrix.fitness = v;
            } else if (t == "value") {
                if (!(v >= -kMaxPhase && v <= kMaxPhase)) throw GenomeError(fmt::format("matrix value {} outside [-2pi, 2pi]", v));
                c.matrix.values.push_back(v);
            } else {
                throw GenomeError(fmt::format("malformed matrix record '{}'", line));
            }
        }
        if (c.matrix.values.size() != d.volume())
            throw GenomeError(fmt::format("matrix has {} values, expected {}", c.matrix.values.size(), d.volume()));
        break;
    }
    }
    return c;
}

Controller load_controller(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open controller file '{}'", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_controller(ss.str());
}

void save_controller(const Controller& c, const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write controller file '{}'", path));
    f << serialize_controller(c);
    if (!f) throw std::runtime_error(fmt::format("failed writing '{}'", path));
}

}  // namespace voxevo
