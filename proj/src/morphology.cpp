#include "voxevo/morphology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace voxevo {

std::optional<Material> material_from_code(int code) noexcept
{
    switch (code) {
    case 0: return Material::Empty;
    case 1: return Material::Passive;
    case 3: return Material::Contractile;
    default: return std::nullopt;
    }
}

const char* to_string(MorphologyErrc errc) noexcept
{
    switch (errc) {
    case MorphologyErrc::Syntax: return "syntax";
    case MorphologyErrc::DimensionMismatch: return "dimension-mismatch";
    case MorphologyErrc::IllegalCharacter: return "illegal-character";
    case MorphologyErrc::Disconnected: return "disconnected-morphology";
    case MorphologyErrc::NoAnchor: return "no-anchor";
    case MorphologyErrc::NoActiveVoxel: return "no-active-voxel";
    case MorphologyErrc::OutOfBounds: return "out-of-bounds";
    case MorphologyErrc::BadBenchmarkIndex: return "bad-benchmark-index";
    }
    return "unknown";
}

namespace {

std::string describe(MorphologyErrc errc, const std::string& message, const std::optional<Coord>& where)
{
    if (where) {
        return fmt::format("{} at ({}, {}, {}): {}", to_string(errc), where->x, where->y, where->z, message);
    }
    return fmt::format("{}: {}", to_string(errc), message);
}

Coord coord_of(const Dims& d, std::size_t flat)
{
    const int x = static_cast<int>(flat % d.nx);
    const int y = static_cast<int>((flat / d.nx) % d.ny);
    const int z = static_cast<int>(flat / (static_cast<std::size_t>(d.nx) * d.ny));
    return {x, y, z};
}

}  // namespace

MorphologyError::MorphologyError(MorphologyErrc errc, std::string message, std::optional<Coord> where)
    : std::runtime_error(describe(errc, message, where)), code_(errc), where_(where)
{
}

VoxelGrid::VoxelGrid(Dims dims, std::vector<Material> cells, std::string id)
    : dims_(dims), cells_(std::move(cells)), id_(std::move(id))
{
    if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0) {
        throw MorphologyError(MorphologyErrc::DimensionMismatch,
                              fmt::format("dimensions must be positive, got {}x{}x{}", dims_.nx, dims_.ny, dims_.nz));
    }
    if (cells_.size() != dims_.volume()) {
        throw MorphologyError(MorphologyErrc::DimensionMismatch,
                              fmt::format("expected {} cells, got {}", dims_.volume(), cells_.size()));
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (!material_from_code(static_cast<int>(cells_[i]))) {
            throw MorphologyError(MorphologyErrc::IllegalCharacter,
                                  fmt::format("material code {}", static_cast<int>(cells_[i])), coord_of(dims_, i));
        }
    }
}

VoxelGrid::VoxelGrid(Dims dims, Material fill, std::string id)
    : VoxelGrid(dims,
                std::vector<Material>(dims.nx > 0 && dims.ny > 0 && dims.nz > 0 ? dims.volume() : 0, fill),
                std::move(id))
{
}

Material VoxelGrid::at(int x, int y, int z) const
{
    if (!dims_.contains(x, y, z)) {
        throw MorphologyError(MorphologyErrc::OutOfBounds, "voxel index outside grid", Coord{x, y, z});
    }
    return cells_[dims_.index(x, y, z)];
}

std::size_t VoxelGrid::count(Material m) const noexcept
{
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), m));
}

VoxelGrid VoxelGrid::with(int x, int y, int z, Material m) const
{
    if (!dims_.contains(x, y, z)) {
        throw MorphologyError(MorphologyErrc::OutOfBounds, "voxel index outside grid", Coord{x, y, z});
    }
    auto cells = cells_;
    cells[dims_.index(x, y, z)] = m;
    return VoxelGrid(dims_, std::move(cells), id_);
}

VoxelGrid VoxelGrid::with_id(std::string id) const
{
    VoxelGrid copy = *this;
    copy.id_ = std::move(id);
    return copy;
}

void validate_structure(const VoxelGrid& grid)
{
    const Dims& d = grid.dims();
    const auto& cells = grid.cells();

    std::size_t first = cells.size();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] != Material::Empty) {
            first = i;
            break;
        }
    }
    if (first == cells.size()) {
        throw MorphologyError(MorphologyErrc::NoAnchor, "grid has no occupied voxels");
    }

    std::vector<char> seen(cells.size(), 0);
    std::vector<std::size_t> stack{first};
    seen[first] = 1;
    static constexpr int kSteps[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        const Coord c = coord_of(d, cur);
        for (const auto& s : kSteps) {
            const int x = c.x + s[0];
            const int y = c.y + s[1];
            const int z = c.z + s[2];
            if (!d.contains(x, y, z)) {
                continue;
            }
            const std::size_t n = d.index(x, y, z);
            if (!seen[n] && cells[n] != Material::Empty) {
                seen[n] = 1;
                stack.push_back(n);
            }
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] != Material::Empty && !seen[i]) {
            throw MorphologyError(MorphologyErrc::Disconnected, "voxel not 6-connected to the first occupied voxel",
                                  coord_of(d, i));
        }
    }

    bool anchored = false;
    for (int z = 0; z < d.nz && !anchored; ++z) {
        for (int y = 0; y < d.ny && !anchored; ++y) {
            anchored = grid.at(0, y, z) != Material::Empty;
        }
    }
    if (!anchored) {
        throw MorphologyError(MorphologyErrc::NoAnchor, "no occupied voxel on the x = 0 face", Coord{0, 0, 0});
    }
}

void validate_morphology(const VoxelGrid& grid)
{
    validate_structure(grid);
    if (grid.count(Material::Contractile) == 0) {
        throw MorphologyError(MorphologyErrc::NoActiveVoxel, "grid has no contractile voxel");
    }
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    return s;
}

}  // namespace

VoxelGrid parse_morphology(std::string_view text, std::string id)
{
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        lines.push_back(trim(text.substr(0, nl)));
        if (nl == std::string_view::npos) {
            break;
        }
        text.remove_prefix(nl + 1);
    }

    std::size_t li = 0;
    auto skip_comments = [&] {
        while (li < lines.size() && (lines[li].empty() || lines[li].front() == '#')) {
            ++li;
        }
    };
    skip_comments();
    if (li == lines.size()) {
        throw MorphologyError(MorphologyErrc::Syntax, "missing 'dims nx ny nz' header");
    }

    Dims dims;
    {
        std::istringstream header{std::string(lines[li])};
        std::string keyword;
        std::string extra;
        if (!(header >> keyword >> dims.nx >> dims.ny >> dims.nz) || keyword != "dims" || (header >> extra)) {
            throw MorphologyError(MorphologyErrc::Syntax, fmt::format("bad header line '{}'", lines[li]));
        }
        if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
            throw MorphologyError(MorphologyErrc::DimensionMismatch, "dimensions must be positive");
        }
        ++li;
    }

    std::vector<Material> cells(dims.volume(), Material::Empty);
    int z = 0;
    int y = 0;
    bool in_block = false;
    for (; li < lines.size(); ++li) {
        const std::string_view line = lines[li];
        if (!line.empty() && line.front() == '#') {
            continue;
        }
        if (line.empty()) {
            if (in_block) {
                if (y != dims.ny) {
                    throw MorphologyError(MorphologyErrc::DimensionMismatch,
                                          fmt::format("layer has {} rows, expected {}", y, dims.ny), Coord{0, y, z});
                }
                ++z;
                y = 0;
                in_block = false;
            }
            continue;
        }
        in_block = true;
        if (z >= dims.nz) {
            throw MorphologyError(MorphologyErrc::DimensionMismatch, fmt::format("more than {} layers", dims.nz),
                                  Coord{0, 0, z});
        }
        if (y >= dims.ny) {
            throw MorphologyError(MorphologyErrc::DimensionMismatch,
                                  fmt::format("layer has more than {} rows", dims.ny), Coord{0, y, z});
        }
        for (std::size_t x = 0; x < line.size() && x < static_cast<std::size_t>(dims.nx); ++x) {
            const char ch = line[x];
            const auto mat = (ch >= '0' && ch <= '9') ? material_from_code(ch - '0') : std::nullopt;
            if (!mat) {
                throw MorphologyError(MorphologyErrc::IllegalCharacter, fmt::format("character '{}'", ch),
                                      Coord{static_cast<int>(x), y, z});
            }
            cells[dims.index(static_cast<int>(x), y, z)] = *mat;
        }
        if (line.size() != static_cast<std::size_t>(dims.nx)) {
            throw MorphologyError(MorphologyErrc::DimensionMismatch,
                                  fmt::format("row has {} columns, expected {}", line.size(), dims.nx),
                                  Coord{static_cast<int>(std::min<std::size_t>(line.size(), dims.nx)), y, z});
        }
        ++y;
    }
    if (in_block) {
        if (y != dims.ny) {
            throw MorphologyError(MorphologyErrc::DimensionMismatch,
                                  fmt::format("layer has {} rows, expected {}", y, dims.ny), Coord{0, y, z});
        }
        ++z;
    }
    if (z != dims.nz) {
        throw MorphologyError(MorphologyErrc::DimensionMismatch, fmt::format("found {} layers, expected {}", z, dims.nz),
                              Coord{0, 0, z});
    }

    VoxelGrid grid(dims, std::move(cells), std::move(id));
    validate_morphology(grid);
    return grid;
}

std::string render_morphology(const VoxelGrid& grid)
{
    const Dims& d = grid.dims();
    std::string out = fmt::format("dims {} {} {}\n", d.nx, d.ny, d.nz);
    for (int z = 0; z < d.nz; ++z) {
        if (z > 0) {
            out += '\n';
        }
        for (int y = 0; y < d.ny; ++y) {
            for (int x = 0; x < d.nx; ++x) {
                out += static_cast<char>('0' + static_cast<int>(grid.at(x, y, z)));
            }
            out += '\n';
        }
    }
    return out;
}

VoxelGrid load_morphology(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open morphology file '{}'", path));
    }
    std::stringstream buf;
    buf << in.rdbuf();
    VoxelGrid grid = parse_morphology(buf.str());
    return grid.with_id(fmt::format("file:{:016x}", morphology_hash(grid)));
}

void save_morphology(const VoxelGrid& grid, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write morphology file '{}'", path));
    }
    out << render_morphology(grid);
}

std::string benchmark_id(int index, std::uint64_t seed)
{
    if (seed == kDefaultBenchSeed) {
        return fmt::format("bha-{}", index);
    }
    return fmt::format("bha-{}:{}", index, seed);
}

VoxelGrid generate_benchmark(int index, std::uint64_t seed)
{
    if (index < 1 || index > 9) {
        throw MorphologyError(MorphologyErrc::BadBenchmarkIndex, fmt::format("index {} not in 1..9", index));
    }
    const Dims d = kBenchmarkDims;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), 0x9e3779b9u};
    std::mt19937_64 rng(seq);
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

    std::vector<Material> cells(d.volume(), Material::Passive);
    auto interior = [&](int y, int z) { return y > 0 && z > 0 && y < d.ny - 1 && z < d.nz - 1; };
    auto set = [&](int x, int y, int z, Material m) {
        if (interior(y, z)) {
            cells[d.index(x, y, z)] = m;
        }
    };
    constexpr auto C = Material::Contractile;

    switch (index) {
    case 1: {  // lower slab
        const int top = uniform_int(2, 3);
        for (int z = 1; z <= top; ++z)
            for (int y = 1; y < d.ny - 1; ++y)
                for (int x = 0; x < d.nx; ++x) set(x, y, z, C);
        break;
    }
    case 2: {  // upper slab
        const int bottom = uniform_int(4, 5);
        for (int z = bottom; z < d.nz - 1; ++z)
            for (int y = 1; y < d.ny - 1; ++y)
                for (int x = 0; x < d.nx; ++x) set(x, y, z, C);
        break;
    }
    case 3: {  // porous core
        for (int z = 1; z < d.nz - 1; ++z)
            for (int y = 1; y < d.ny - 1; ++y)
                for (int x = 0; x < d.nx; ++x)
                    if (!chance(0.15)) set(x, y, z, C);
        break;
    }
    case 4: {  // transverse stripes
        const int period = uniform_int(2, 4);
        const int offset = uniform_int(0, period - 1);
        for (int x = 0; x < d.nx; ++x) {
            if ((x + offset) % period != 0) continue;
            for (int z = 1; z < d.nz - 1; ++z)
                for (int y = 1; y < d.ny - 1; ++y) set(x, y, z, C);
        }
        break;
    }
    case 5: {  // one lateral half
        const int split = uniform_int(3, 4);
        for (int z = 1; z < d.nz - 1; ++z)
            for (int y = 1; y <= split; ++y)
                for (int x = 0; x < d.nx; ++x) set(x, y, z, C);
        break;
    }
    case 6: {  // checker blocks
        const int block = uniform_int(2, 3);
        const int phase = uniform_int(0, 1);
        for (int z = 1; z < d.nz - 1; ++z)
            for (int y = 1; y < d.ny - 1; ++y)
                for (int x = 0; x < d.nx; ++x)
                    if (((x / block) + ((y - 1) / block) + ((z - 1) / block) + phase) % 2 == 0) set(x, y, z, C);
        break;
    }
    case 7: {  // diagonal band rising along x
        const double shift = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
        for (int x = 0; x < d.nx; ++x) {
            const double centre = 1.0 + shift + 5.0 * x / (d.nx - 1);
            for (int z = 1; z < d.nz - 1; ++z)
                for (int y = 1; y < d.ny - 1; ++y)
                    if (std::abs(z - centre) <= 1.0) set(x, y, z, C);
        }
        break;
    }
    case 8: {  // blobs
        const int blobs = uniform_int(4, 6);
        for (int b = 0; b < blobs; ++b) {
            const double cx = std::uniform_real_distribution<double>(0.0, d.nx - 1.0)(rng);
            const double cy = std::uniform_real_distribution<double>(1.0, d.ny - 2.0)(rng);
            const double cz = std::uniform_real_distribution<double>(1.0, d.nz - 2.0)(rng);
            const double r = std::uniform_real_distribution<double>(1.5, 2.5)(rng);
            for (int z = 1; z < d.nz - 1; ++z)
                for (int y = 1; y < d.ny - 1; ++y)
                    for (int x = 0; x < d.nx; ++x) {
                        const double dx = x - cx, dy = y - cy, dz = z - cz;
                        if (dx * dx + dy * dy + dz * dz <= r * r) set(x, y, z, C);
                    }
        }
        break;
    }
    case 9: {  // inner ring with gaps
        for (int x = 0; x < d.nx; ++x) {
            const bool gap = chance(0.2);
            for (int z = 1; z < d.nz - 1; ++z)
                for (int y = 1; y < d.ny - 1; ++y) {
                    const bool ring = y == 1 || y == d.ny - 2 || z == 1 || z == d.nz - 2;
                    if (ring && !gap) set(x, y, z, C);
                }
        }
        break;
    }
    default: break;
    }

    if (std::none_of(cells.begin(), cells.end(), [](Material m) { return m == C; })) {
        cells[d.index(d.nx / 2, d.ny / 2, d.nz / 2)] = C;
    }
    VoxelGrid grid(d, std::move(cells), benchmark_id(index, seed));
    validate_morphology(grid);
    return grid;
}

MaterialInputs material_inputs(const VoxelGrid& grid, int x, int y, int z)
{
    const Dims& d = grid.dims();
    if (!d.contains(x, y, z)) {
        throw MorphologyError(MorphologyErrc::OutOfBounds, "voxel index outside grid", Coord{x, y, z});
    }
    auto normalize = [](int i, int n) { return n == 1 ? 0.0 : 2.0 * i / (n - 1) - 1.0; };
    return {normalize(x, d.nx), normalize(y, d.ny), normalize(z, d.nz),
            static_cast<double>(static_cast<int>(grid.at(x, y, z)))};
}

VoxelGrid mirror_y(const VoxelGrid& grid)
{
    const Dims& d = grid.dims();
    std::vector<Material> cells(d.volume());
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) cells[d.index(x, d.ny - 1 - y, z)] = grid.at(x, y, z);
    return VoxelGrid(d, std::move(cells), grid.id() + "~my");
}

std::uint64_t morphology_hash(const VoxelGrid& grid)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : render_morphology(grid)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace voxevo
