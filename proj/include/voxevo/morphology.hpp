#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace voxevo {

/// Voxel material codes as they appear in morphology files and network inputs.
enum class Material : std::uint8_t { Empty = 0, Passive = 1, Contractile = 3 };

/// Returns the material for a code, or nullopt for anything outside {0, 1, 3}.
std::optional<Material> material_from_code(int code) noexcept;

struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t volume() const noexcept { return static_cast<std::size_t>(nx) * ny * nz; }
    bool contains(int x, int y, int z) const noexcept
    {
        return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
    }
    /// Flat index, x fastest.
    std::size_t index(int x, int y, int z) const noexcept
    {
        return static_cast<std::size_t>(x) + static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z);
    }
    friend bool operator==(const Dims&, const Dims&) = default;
};

inline constexpr Dims kBenchmarkDims{20, 8, 8};

struct Coord {
    int x = 0;
    int y = 0;
    int z = 0;
    friend bool operator==(const Coord&, const Coord&) = default;
};

enum class MorphologyErrc {
    Syntax,
    DimensionMismatch,
    IllegalCharacter,
    Disconnected,
    NoAnchor,
    NoActiveVoxel,
    OutOfBounds,
    BadBenchmarkIndex,
};

const char* to_string(MorphologyErrc errc) noexcept;

class MorphologyError : public std::runtime_error {
public:
    MorphologyError(MorphologyErrc errc, std::string message, std::optional<Coord> where = std::nullopt);

    MorphologyErrc code() const noexcept { return code_; }
    const std::optional<Coord>& where() const noexcept { return where_; }

private:
    MorphologyErrc code_;
    std::optional<Coord> where_;
};

/// Dense material lattice. Construction checks shape only; topological
/// validity (connectivity, anchor, actuation) is checked by validate_morphology.
class VoxelGrid {
public:
    VoxelGrid() = default;
    VoxelGrid(Dims dims, std::vector<Material> cells, std::string id = {});
    /// Uniform grid filled with one material.
    VoxelGrid(Dims dims, Material fill, std::string id = {});

    const Dims& dims() const noexcept { return dims_; }
    const std::string& id() const noexcept { return id_; }
    const std::vector<Material>& cells() const noexcept { return cells_; }

    Material at(int x, int y, int z) const;
    Material at(std::size_t flat) const { return cells_.at(flat); }

    std::size_t count(Material m) const noexcept;
    std::size_t occupied() const noexcept { return cells_.size() - count(Material::Empty); }

    VoxelGrid with(int x, int y, int z, Material m) const;
    VoxelGrid with_id(std::string id) const;

    friend bool operator==(const VoxelGrid& a, const VoxelGrid& b)
    {
        return a.dims_ == b.dims_ && a.cells_ == b.cells_;
    }

private:
    Dims dims_;
    std::vector<Material> cells_;
    std::string id_;
};

/// Throws MorphologyError if the occupied voxels are not a single 6-connected
/// component, no occupied voxel has x == 0, or no voxel is contractile.
void validate_morphology(const VoxelGrid& grid);

/// Like validate_morphology but without the contractile-voxel requirement.
void validate_structure(const VoxelGrid& grid);

VoxelGrid parse_morphology(std::string_view text, std::string id = {});
std::string render_morphology(const VoxelGrid& grid);

VoxelGrid load_morphology(const std::string& path);
void save_morphology(const VoxelGrid& grid, const std::string& path);

/// Seeded stand-in for the nine reference actuators: 20x8x8 solid beam with a
/// one-voxel passive enclosure on the four lateral faces and an
/// index-dependent contractile pattern inside.
VoxelGrid generate_benchmark(int index, std::uint64_t seed);

/// Registry id used for benchmarks, e.g. "bha-3" or "bha-3:7" for a non-default seed.
inline constexpr std::uint64_t kDefaultBenchSeed = 42;
std::string benchmark_id(int index, std::uint64_t seed = kDefaultBenchSeed);

/// Network inputs for one voxel: coordinates normalized to [-1, 1] and the raw material code.
struct MaterialInputs {
    double xn = 0;
    double yn = 0;
    double zn = 0;
    double m = 0;

    std::array<double, 4> as_array() const noexcept { return {xn, yn, zn, m}; }
};

MaterialInputs material_inputs(const VoxelGrid& grid, int x, int y, int z);

/// Reflects the grid across the y mid-plane.
VoxelGrid mirror_y(const VoxelGrid& grid);

/// 64-bit FNV-1a of the rendered grid, used to register file morphologies by content.
std::uint64_t morphology_hash(const VoxelGrid& grid);

}  // namespace voxevo
