#include "voxevo/controller.hpp"
#include "voxevo/evaluation.hpp"
#include "voxevo/experiment_config.hpp"
#include "voxevo/morphology.hpp"
#include "voxevo/orchestrator.hpp"
#include "voxevo/physics.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace voxevo;

namespace {

PhaseField field_from(const VoxelGrid& grid, const std::vector<double>& values)
{
    return PhaseField(grid.dims(), values);
}

std::vector<int> cell_codes(const VoxelGrid& g)
{
    std::vector<int> out;
    out.reserve(g.cells().size());
    for (auto m : g.cells()) out.push_back(static_cast<int>(m));
    return out;
}

}  // namespace

PYBIND11_MODULE(_voxevo, m)
{
    m.doc() = "Voxel soft-actuator simulation and neuroevolution";

    py::register_exception<MorphologyError>(m, "MorphologyError", PyExc_ValueError);
    py::register_exception<GenomeError>(m, "GenomeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalDivergence>(m, "NumericalDivergence", PyExc_ArithmeticError);

    m.attr("MAX_PHASE") = kMaxPhase;
    m.attr("DIVERGENCE_PENALTY") = kDivergencePenalty;
    m.attr("DEFAULT_BENCH_SEED") = kDefaultBenchSeed;

    py::class_<VoxelGrid>(m, "Morphology")
        .def_property_readonly("dims", [](const VoxelGrid& g) { return std::tuple{g.dims().nx, g.dims().ny, g.dims().nz}; })
        .def_property_readonly("id", &VoxelGrid::id)
        .def_property_readonly("cells", &cell_codes, "Material codes, x fastest")
        .def_property_readonly("occupied", &VoxelGrid::occupied)
        .def("at", [](const VoxelGrid& g, int x, int y, int z) { return static_cast<int>(g.at(x, y, z)); }, py::arg("x"),
             py::arg("y"), py::arg("z"))
        .def("render", &render_morphology)
        .def("__eq__", [](const VoxelGrid& a, const VoxelGrid& b) { return a == b; })
        .def("__repr__", [](const VoxelGrid& g) {
            return "<Morphology " + g.id() + " " + std::to_string(g.dims().nx) + "x" + std::to_string(g.dims().ny) + "x" +
                   std::to_string(g.dims().nz) + ">";
        });

    m.def("parse_morphology", [](const std::string& text) { return parse_morphology(text); }, py::arg("text"));
    m.def("load_morphology", &load_morphology, py::arg("path"));
    m.def("generate_benchmark", &generate_benchmark, py::arg("index"), py::arg("seed") = kDefaultBenchSeed);

    py::class_<SimParams>(m, "SimParams")
        .def(py::init<>())
        .def_readwrite("voxel_len", &SimParams::voxel_len)
        .def_readwrite("stiffness", &SimParams::stiffness)
        .def_readwrite("damping_ratio", &SimParams::damping_ratio)
        .def_readwrite("mass", &SimParams::mass)
        .def_readwrite("actuation_amp", &SimParams::actuation_amp)
        .def_readwrite("actuation_freq", &SimParams::actuation_freq)
        .def_readwrite("duration", &SimParams::duration)
        .def_readwrite("dt", &SimParams::dt)
        .def_readwrite("gravity", &SimParams::gravity)
        .def("validate", &SimParams::validate);

    m.def(
        "simulate",
        [](const VoxelGrid& grid, const std::vector<double>& phases, const SimParams& params) {
            const auto trace = simulate(grid, field_from(grid, phases), params);
            std::vector<std::tuple<double, double, double, double>> out;
            out.reserve(trace.samples.size());
            for (const auto& s : trace.samples) out.emplace_back(s.t, s.x, s.y, s.z);
            return out;
        },
        py::arg("grid"), py::arg("phases"), py::arg("params") = SimParams{},
        "Tip trace as (t, x, y, z) tuples for one phase per voxel, x fastest.");
    m.def(
        "displacement",
        [](const VoxelGrid& grid, const std::vector<double>& phases, const SimParams& params) {
            return fitness_displacement(simulate(grid, field_from(grid, phases), params), params);
        },
        py::arg("grid"), py::arg("phases"), py::arg("params") = SimParams{});

    py::class_<Controller>(m, "Controller")
        .def_static("parse", &parse_controller, py::arg("text"))
        .def_static("load", &load_controller, py::arg("path"))
        .def_static("minimal_neat", [](double bias) {
            auto g = make_minimal_genome(4, 1);
            g.nodes.back().bias = bias;
            return Controller::neat(std::move(g));
        }, py::arg("bias") = 0.0, "Minimal CPPN with zero weights and a constant output bias.")
        .def_property_readonly("kind", [](const Controller& c) { return std::string(controller_kind_name(c.kind)); })
        .def_property_readonly("fitness", &Controller::fitness)
        .def("serialize", &serialize_controller)
        .def("save", &save_controller, py::arg("path"))
        .def("phase_field", [](const Controller& c, const VoxelGrid& g) { return c.phase_field(g).values(); }, py::arg("grid"))
        .def("complexity", [](const Controller& c) {
            const auto r = complexity_report(c);
            return std::pair{r.hidden_nodes, r.connections};
        })
        .def("__eq__", [](const Controller& a, const Controller& b) { return a == b; });

    m.def("evaluate", &evaluate_controller, py::arg("controller"), py::arg("grid"), py::arg("params") = SimParams{});
    m.def(
        "evaluate_robustness",
        [](const Controller& c, const std::vector<VoxelGrid>& grids, const SimParams& p) { return evaluate_robustness(c, grids, p); },
        py::arg("controller"), py::arg("grids"), py::arg("params") = SimParams{});
    m.def("aptitude", [](const std::vector<double>& d) { return aptitude(d); }, py::arg("displacements"));

    m.def(
        "run_campaign",
        [](const std::string& config_text) {
            CampaignConfig cfg;
            apply_config(cfg, ConfigDocument::parse(config_text));
            CampaignResult result;
            {
                py::gil_scoped_release release;
                result = run_campaign(cfg);
            }
            py::dict out;
            for (const auto& [algo, trials] : result.trials) {
                py::list rows;
                for (const auto& t : trials) {
                    py::dict row;
                    row["trial"] = t.trial;
                    row["seed"] = t.seed;
                    row["champion_fitness"] = t.champion_fitness;
                    row["best_per_generation"] = [&] {
                        std::vector<double> v;
                        for (const auto& r : t.log) v.push_back(r.best_fitness);
                        return v;
                    }();
                    row["champion"] = t.champion;
                    if (t.complexity) row["complexity"] = std::pair{t.complexity->hidden_nodes, t.complexity->connections};
                    rows.append(row);
                }
                out[py::str(std::string(algorithm_name(algo)))] = rows;
            }
            return out;
        },
        py::arg("config_text"), "Runs a campaign described by a key = value config document and writes its result files.");
}
