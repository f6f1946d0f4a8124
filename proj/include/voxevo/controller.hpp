#pragma once

#include "voxevo/cppn.hpp"
#include "voxevo/hyperneat.hpp"
#include "voxevo/sga.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace voxevo {

enum class ControllerKind { NeatCppn, HyperneatNet, SgaMatrix };

std::string_view controller_kind_name(ControllerKind k) noexcept;
std::optional<ControllerKind> controller_kind_from_name(std::string_view name) noexcept;

/// Anything that maps a morphology to a phase field. Only the member
/// matching `kind` is meaningful.
struct Controller {
    ControllerKind kind = ControllerKind::NeatCppn;
    CppnGenome cppn;          ///< NeatCppn and HyperneatNet
    SubstrateSpec substrate;  ///< HyperneatNet
    MatrixGenome matrix;      ///< SgaMatrix

    static Controller neat(CppnGenome g);
    static Controller hyperneat(CppnGenome g, SubstrateSpec spec);
    static Controller sga(MatrixGenome m);

    PhaseField phase_field(const VoxelGrid& grid) const;
    std::optional<double> fitness() const;
    void set_fitness(std::optional<double> f);

    friend bool operator==(const Controller& a, const Controller& b);
};

/// First line `controller <kind>`; a `substrate` or `matrix` header where
/// relevant; then the genome records.
std::string serialize_controller(const Controller& c);
Controller parse_controller(std::string_view text);

Controller load_controller(const std::string& path);
void save_controller(const Controller& c, const std::string& path);

}  // namespace voxevo
