#include "voxevo/physics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace voxevo {

// ---------------------------------------------------------------------------
// SimParams

void SimParams::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid simulation parameter: " + what); };
    if (!(voxel_len > 0)) fail("voxel_len must be > 0");
    if (!(stiffness > 0)) fail("stiffness must be > 0");
    if (!(mass > 0)) fail("mass must be > 0");
    if (!(damping_ratio >= 0)) fail("damping_ratio must be >= 0");
    if (!(actuation_amp >= 0 && actuation_amp < 0.5)) fail("actuation_amp must be in [0, 0.5)");
    if (!(actuation_freq > 0)) fail("actuation_freq must be > 0");
    if (!(duration > 0)) fail("duration must be > 0");
    if (!(dt >= 0) || dt > max_dt()) fail(fmt::format("dt must be in (0, {}] or 0 for automatic", max_dt()));
    if (!std::isfinite(gravity)) fail("gravity must be finite");
}

double SimParams::max_dt() const { return 0.1 * std::sqrt(mass / stiffness); }

std::int64_t SimParams::step_count() const
{
    const double requested = dt > 0 ? dt : max_dt();
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(duration / requested - 1e-9)));
}

double SimParams::resolved_dt() const { return duration / static_cast<double>(step_count()); }

double SimParams::damping_coefficient() const { return 2.0 * damping_ratio * std::sqrt(stiffness * mass); }

// ---------------------------------------------------------------------------
// PhaseField

namespace {

void check_phase(double v)
{
    if (!(v >= -kMaxPhase && v <= kMaxPhase)) {
        throw std::invalid_argument(fmt::format("phase offset {} outside [-2pi, 2pi]", v));
    }
}

}  // namespace

PhaseField::PhaseField(Dims dims) : dims_(dims), values_(dims.volume(), 0.0) {}

PhaseField::PhaseField(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values))
{
    if (values_.size() != dims_.volume()) {
        throw std::invalid_argument(
            fmt::format("phase field has {} values, grid needs {}", values_.size(), dims_.volume()));
    }
    std::for_each(values_.begin(), values_.end(), check_phase);
}

void PhaseField::set(std::size_t flat, double value)
{
    check_phase(value);
    values_.at(flat) = value;
}

PhaseField mirror_y(const PhaseField& field)
{
    const Dims& d = field.dims();
    std::vector<double> out(d.volume());
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) out[d.index(x, d.ny - 1 - y, z)] = field.at(x, y, z);
    return PhaseField(d, std::move(out));
}

PhaseField read_phase_csv(std::istream& in, Dims dims)
{
    std::vector<double> values;
    values.reserve(dims.volume());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::string tok;
        while (fields >> tok) {
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) {
                throw std::invalid_argument(fmt::format("phase csv line {}: '{}' is not a number", lineno, tok));
            }
            values.push_back(v);
        }
    }
    return PhaseField(dims, std::move(values));
}

void write_phase_csv(std::ostream& out, const PhaseField& field)
{
    for (const double v : field.values()) {
        out << fmt::format("{:.17g}\n", v);
    }
}

// ---------------------------------------------------------------------------
// Trace IO

void write_trace_csv(std::ostream& out, const TipTrace& trace)
{
    out << "t,x,y,z\n";
    for (const auto& s : trace.samples) {
        out << fmt::format("{},{},{},{}\n", s.t, s.x, s.y, s.z);
    }
}

TipTrace read_trace_csv(std::istream& in)
{
    TipTrace trace;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#' || line.rfind("t,", 0) == 0) continue;
        TipSample s;
        char c1 = 0, c2 = 0, c3 = 0;
        std::istringstream row(line);
        if (!(row >> s.t >> c1 >> s.x >> c2 >> s.y >> c3 >> s.z) || c1 != ',' || c2 != ',' || c3 != ',') {
            throw std::invalid_argument(fmt::format("trace csv line {}: expected t,x,y,z", lineno));
        }
        if (!trace.samples.empty() && !(s.t > trace.samples.back().t)) {
            throw std::invalid_argument(fmt::format("trace csv line {}: time not increasing", lineno));
        }
        trace.samples.push_back(s);
    }
    if (trace.samples.empty()) {
        throw std::invalid_argument("trace csv has no samples");
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Lattice

namespace {

// Positive flat offsets: three axial directions, then the two diagonals of
// each yz, xy and xz unit square.
constexpr std::array<std::array<int, 3>, 9> kFamilies{{
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
    {0, 1, 1}, {0, -1, 1},
    {1, 1, 0}, {-1, 1, 0},
    {1, 0, 1}, {-1, 0, 1},
}};

}  // namespace

Lattice::Lattice(const VoxelGrid& grid, const SimParams& params) : dims_(grid.dims()), params_(params)
{
    params_.validate();
    const Dims& d = dims_;
    const std::size_t n = d.volume();
    const double L0 = params_.voxel_len;

    x0_.resize(n);
    y0_.resize(n);
    z0_.resize(n);
    movable_.assign(n, 0.0);
    std::vector<std::uint32_t> mass_of(n, UINT32_MAX);
    int max_x = -1;
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                const std::size_t i = d.index(x, y, z);
                x0_[i] = (x + 0.5) * L0;
                y0_[i] = (y + 0.5) * L0;
                z0_[i] = (z + 0.5) * L0;
                if (grid.at(i) != Material::Empty) {
                    mass_of[i] = static_cast<std::uint32_t>(mass_cells_.size());
                    mass_cells_.push_back(i);
                    movable_[i] = x == 0 ? 0.0 : 1.0;
                    max_x = std::max(max_x, x);
                }
            }
    for (const std::size_t i : mass_cells_) {
        if (static_cast<int>(i % d.nx) == max_x) tip_cells_.push_back(i);
    }

    for (const auto& off : kFamilies) {
        Family fam;
        fam.offset = off;
        const long long delta = off[0] + static_cast<long long>(d.nx) * (off[1] + static_cast<long long>(d.ny) * off[2]);
        fam.delta = static_cast<std::size_t>(delta);
        fam.dx = off[0] * L0;
        const bool diagonal = (off[0] != 0) + (off[1] != 0) + (off[2] != 0) == 2;
        const std::size_t len = n > fam.delta ? n - fam.delta : 0;
        fam.mask.assign(len, 0.0);
        fam.rest.assign(len, L0);
        fam.weight_a.assign(len, 0.0);
        fam.weight_b.assign(len, 0.0);
        bool any = false;
        for (int z = 0; z < d.nz; ++z)
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) {
                    const int x2 = x + off[0], y2 = y + off[1], z2 = z + off[2];
                    if (!d.contains(x2, y2, z2)) continue;
                    const std::size_t a = d.index(x, y, z);
                    const std::size_t b = d.index(x2, y2, z2);
                    const Material ma = grid.at(a);
                    const Material mb = grid.at(b);
                    if (ma == Material::Empty || mb == Material::Empty) continue;
                    const double ddx = x0_[b] - x0_[a], ddy = y0_[b] - y0_[a], ddz = z0_[b] - z0_[a];
                    const double rest = std::sqrt(ddx * ddx + ddy * ddy + ddz * ddz);
                    const bool ca = ma == Material::Contractile;
                    const bool cb = mb == Material::Contractile;
                    const int nc = ca + cb;
                    fam.mask[a] = 1.0;
                    fam.rest[a] = rest;
                    fam.weight_a[a] = nc ? static_cast<double>(ca) / nc : 0.0;
                    fam.weight_b[a] = nc ? static_cast<double>(cb) / nc : 0.0;
                    springs_.push_back({mass_of[a], mass_of[b], a, b, rest, ca, cb, diagonal});
                    any = true;
                }
        if (any) families_.push_back(std::move(fam));
    }
}

Lattice build_lattice(const VoxelGrid& grid, const SimParams& params) { return Lattice(grid, params); }

std::size_t Lattice::axial_spring_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(springs_.begin(), springs_.end(), [](const Spring& s) { return !s.diagonal; }));
}

std::size_t Lattice::diagonal_spring_count() const noexcept { return springs_.size() - axial_spring_count(); }

DynamicState Lattice::rest_state() const
{
    DynamicState s;
    s.y = y0_;
    s.z = z0_;
    s.vy.assign(y0_.size(), 0.0);
    s.vz.assign(z0_.size(), 0.0);
    return s;
}

Vec3 Lattice::position(const DynamicState& state, std::uint32_t mass) const
{
    const std::size_t c = mass_cells_.at(mass);
    return {x0_[c], state.y[c], state.z[c]};
}

Vec3 Lattice::tip_centroid(const DynamicState& state) const
{
    Vec3 sum;
    for (const std::size_t c : tip_cells_) {
        sum.x += x0_[c];
        sum.y += state.y[c];
        sum.z += state.z[c];
    }
    const double n = static_cast<double>(tip_cells_.size());
    return {sum.x / n, sum.y / n, sum.z / n};
}

double actuated_rest_length(const Spring& spring, double t, const PhaseField& phases, const SimParams& params)
{
    const int nc = spring.contractile_a + spring.contractile_b;
    if (nc == 0) return spring.rest;
    const double w = 2.0 * std::numbers::pi * params.actuation_freq * t;
    double s = 0;
    if (spring.contractile_a) s += std::sin(w + phases.at(spring.cell_a));
    if (spring.contractile_b) s += std::sin(w + phases.at(spring.cell_b));
    return spring.rest * (1.0 + params.actuation_amp * (s / nc));
}

void Lattice::phase_tables(const PhaseField& phases, std::vector<double>& cos_phase, std::vector<double>& sin_phase) const
{
    if (!(phases.dims() == dims_)) {
        throw std::invalid_argument("phase field dimensions do not match the lattice");
    }
    const std::size_t n = dims_.volume();
    cos_phase.resize(n);
    sin_phase.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cos_phase[i] = std::cos(phases.at(i));
        sin_phase[i] = std::sin(phases.at(i));
    }
}

void Lattice::step(DynamicState& state, double t, double dt, const PhaseField& phases) const
{
    if (!(dt > 0) || dt > params_.max_dt()) {
        throw std::invalid_argument(fmt::format("dt {} outside (0, {}]", dt, params_.max_dt()));
    }
    std::vector<double> cos_phase, sin_phase;
    phase_tables(phases, cos_phase, sin_phase);
    step_impl(state, t, dt, cos_phase, sin_phase);
}

namespace {

// Scalar spring force along each family pair (i, i + d), projected on y and z.
void spring_forces(std::size_t m, std::size_t d, double dx2, double k, double c, double amp,
                   const double* __restrict mask, const double* __restrict rest0, const double* __restrict wa,
                   const double* __restrict wb, const double* __restrict drive, const double* __restrict py,
                   const double* __restrict pz, const double* __restrict vy, const double* __restrict vz,
                   double* __restrict ty, double* __restrict tz)
{
    for (std::size_t i = 0; i < m; ++i) {
        const double dy = py[i + d] - py[i];
        const double dz = pz[i + d] - pz[i];
        const double len = std::sqrt(dx2 + dy * dy + dz * dz);
        const double inv = 1.0 / (len + 1e-300);
        const double rest = rest0[i] * (1.0 + amp * (wa[i] * drive[i] + wb[i] * drive[i + d]));
        const double dvy = vy[i + d] - vy[i];
        const double dvz = vz[i + d] - vz[i];
        const double f = mask[i] * (k * (len - rest) + c * (dvy * dy + dvz * dz) * inv);
        ty[i] = f * dy * inv;
        tz[i] = f * dz * inv;
    }
}

}  // namespace

void Lattice::step_impl(DynamicState& state, double t, double dt, const std::vector<double>& cos_phase,
                        const std::vector<double>& sin_phase) const
{
    const std::size_t n = dims_.volume();
    if (state.workspace.size() < 5 * n) state.workspace.resize(5 * n);
    double* __restrict fy = state.workspace.data();
    double* __restrict fz = fy + n;
    double* __restrict ty = fz + n;
    double* __restrict tz = ty + n;
    double* __restrict drive = tz + n;
    const double* __restrict py = state.y.data();
    const double* __restrict pz = state.z.data();
    double* __restrict vy = state.vy.data();
    double* __restrict vz = state.vz.data();

    const double k = params_.stiffness;
    const double c = params_.damping_coefficient();
    const double amp = params_.actuation_amp;
    const double w = 2.0 * std::numbers::pi * params_.actuation_freq * t;
    const double sw = std::sin(w);
    const double cw = std::cos(w);
    const double* __restrict cph = cos_phase.data();
    const double* __restrict sph = sin_phase.data();

    for (std::size_t i = 0; i < n; ++i) {
        drive[i] = sw * cph[i] + cw * sph[i];  // sin(w + phase)
        fy[i] = 0.0;
        fz[i] = 0.0;
    }

    for (const Family& fam : families_) {
        const std::size_t m = fam.mask.size();
        const std::size_t d = fam.delta;
        const double dx2 = fam.dx * fam.dx;
        const double* __restrict mask = fam.mask.data();
        const double* __restrict rest0 = fam.rest.data();
        const double* __restrict wa = fam.weight_a.data();
        const double* __restrict wb = fam.weight_b.data();
        spring_forces(m, d, dx2, k, c, amp, mask, rest0, wa, wb, drive, py, pz, vy, vz, ty, tz);
        for (std::size_t i = 0; i < m; ++i) {
            fy[i] += ty[i];
            fz[i] += tz[i];
        }
        for (std::size_t i = 0; i < m; ++i) {
            fy[i + d] -= ty[i];
            fz[i + d] -= tz[i];
        }
    }

    const double inv_m = 1.0 / params_.mass;
    const double g = params_.gravity;
    const double* __restrict movable = movable_.data();
    double* __restrict y = state.y.data();
    double* __restrict z = state.z.data();
    const double limit = 1e3 * params_.voxel_len;
    int outside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        vy[i] += movable[i] * (fy[i] * inv_m) * dt;
        vz[i] += movable[i] * (fz[i] * inv_m - g) * dt;
        y[i] += vy[i] * dt;
        z[i] += vz[i] * dt;
        outside |= !(std::abs(y[i]) <= limit) | !(std::abs(z[i]) <= limit);
    }
    if (outside) {
        throw NumericalDivergence(fmt::format("a coordinate left |c| <= {} at t = {}", limit, t + dt));
    }
}

TipTrace simulate(const VoxelGrid& grid, const PhaseField& phases, const SimParams& params)
{
    const Lattice lattice(grid, params);
    std::vector<double> cos_phase, sin_phase;
    lattice.phase_tables(phases, cos_phase, sin_phase);

    const std::int64_t steps = params.step_count();
    const double dt = params.resolved_dt();
    DynamicState state = lattice.rest_state();
    TipTrace trace;
    trace.samples.reserve(static_cast<std::size_t>(steps) + 1);
    auto record = [&](double t) {
        const Vec3 tip = lattice.tip_centroid(state);
        trace.samples.push_back({t, tip.x, tip.y, tip.z});
    };
    record(0.0);
    for (std::int64_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        lattice.step_impl(state, t, dt, cos_phase, sin_phase);
        record(static_cast<double>(s + 1) * dt);
    }
    return trace;
}

double fitness_displacement(const TipTrace& trace, const SimParams& params)
{
    const auto& s = trace.samples;
    if (s.empty()) {
        throw std::invalid_argument("fitness of an empty trace");
    }
    const double z0 = s.front().z;
    if (s.size() == 1) {
        return (s.front().z - z0) / params.voxel_len;
    }
    const double t_end = s.back().t;
    const double t_start = std::max(s.front().t, t_end - params.period());

    // Time-weighted (trapezoidal) mean of z over [t_start, t_end].
    std::size_t i = s.size() - 1;
    while (i > 0 && s[i - 1].t > t_start) --i;
    // s[i-1].t <= t_start < s[i].t, or i == 0
    double area = 0;
    double prev_t = s[0].t;
    double prev_dz = 0.0;
    if (i > 0) {
        const double f = (t_start - s[i - 1].t) / (s[i].t - s[i - 1].t);
        prev_t = t_start;
        prev_dz = (s[i - 1].z - z0) + f * (s[i].z - s[i - 1].z);
    }
    for (; i < s.size(); ++i) {
        const double dz = s[i].z - z0;
        area += 0.5 * (prev_dz + dz) * (s[i].t - prev_t);
        prev_t = s[i].t;
        prev_dz = dz;
    }
    const double span = t_end - t_start;
    const double mean = span > 0 ? area / span : s.back().z - z0;
    return mean / params.voxel_len;
}

}  // namespace voxevo
