#pragma once

#include "voxevo/morphology.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace voxevo {

inline constexpr double kMaxPhase = 2.0 * std::numbers::pi;

struct SimParams {
    double voxel_len = 1.0;       ///< L0, also the fitness length unit
    double stiffness = 500.0;     ///< k
    double damping_ratio = 0.1;   ///< per-spring critical-damping ratio
    double mass = 1.0;            ///< per voxel
    double actuation_amp = 0.15;  ///< fractional rest-length amplitude
    double actuation_freq = 1.0;  ///< Hz
    double duration = 3.0;        ///< s
    double dt = 0.0;              ///< 0 selects 0.1 * sqrt(m / k)
    double gravity = 0.0;         ///< acceleration along -z

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;

    double period() const noexcept { return 1.0 / actuation_freq; }
    double max_dt() const;
    /// Requested (or automatic) step shrunk so that it divides the duration exactly.
    double resolved_dt() const;
    std::int64_t step_count() const;
    /// Viscous coefficient shared by every spring: 2 * ratio * sqrt(k m).
    double damping_coefficient() const;

    friend bool operator==(const SimParams&, const SimParams&) = default;
};

/// Per-voxel actuation phase offsets, x-fastest, clamped to [-2pi, 2pi].
class PhaseField {
public:
    PhaseField() = default;
    explicit PhaseField(Dims dims);
    PhaseField(Dims dims, std::vector<double> values);

    const Dims& dims() const noexcept { return dims_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double at(int x, int y, int z) const { return values_.at(dims_.index(x, y, z)); }
    double at(std::size_t flat) const { return values_.at(flat); }
    void set(std::size_t flat, double value);

    friend bool operator==(const PhaseField&, const PhaseField&) = default;

private:
    Dims dims_;
    std::vector<double> values_;
};

PhaseField mirror_y(const PhaseField& field);

/// One value per voxel, x-fastest, one value per line; '#' lines ignored.
PhaseField read_phase_csv(std::istream& in, Dims dims);
void write_phase_csv(std::ostream& out, const PhaseField& field);

struct TipSample {
    double t = 0;
    double x = 0;
    double y = 0;
    double z = 0;
    friend bool operator==(const TipSample&, const TipSample&) = default;
};

struct TipTrace {
    std::vector<TipSample> samples;
    friend bool operator==(const TipTrace&, const TipTrace&) = default;
};

/// `t,x,y,z` with shortest round-trip formatting.
void write_trace_csv(std::ostream& out, const TipTrace& trace);
TipTrace read_trace_csv(std::istream& in);

class NumericalDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec3 {
    double x = 0;
    double y = 0;
    double z = 0;
};

struct Spring {
    std::uint32_t a = 0;  ///< mass index
    std::uint32_t b = 0;
    std::size_t cell_a = 0;  ///< flat voxel index
    std::size_t cell_b = 0;
    double rest = 0;  ///< unactuated rest length
    bool contractile_a = false;
    bool contractile_b = false;
    bool diagonal = false;
};

/// Rest length of a spring at time t under the phase field.
double actuated_rest_length(const Spring& spring, double t, const PhaseField& phases, const SimParams& params);

/// Positions and velocities for every lattice cell (x-fastest). Empty cells
/// are inert placeholders; x is frozen so only y and z are integrated.
struct DynamicState {
    std::vector<double> y;
    std::vector<double> z;
    std::vector<double> vy;
    std::vector<double> vz;
    std::vector<double> workspace;  ///< integrator scratch, resized on demand
};

/// Point masses at voxel centres, axial springs between 6-neighbours and
/// face-diagonal springs in every xy, xz, and yz unit square.
class Lattice {
public:
    Lattice(const VoxelGrid& grid, const SimParams& params);

    const Dims& dims() const noexcept { return dims_; }
    std::size_t mass_count() const noexcept { return mass_cells_.size(); }
    const std::vector<std::size_t>& mass_cells() const noexcept { return mass_cells_; }
    const std::vector<Spring>& springs() const noexcept { return springs_; }
    std::size_t axial_spring_count() const noexcept;
    std::size_t diagonal_spring_count() const noexcept;
    bool is_fixed(std::uint32_t mass) const { return !movable_.at(mass_cells_.at(mass)); }
    const std::vector<std::size_t>& tip_cells() const noexcept { return tip_cells_; }

    DynamicState rest_state() const;
    Vec3 position(const DynamicState& state, std::uint32_t mass) const;
    Vec3 tip_centroid(const DynamicState& state) const;

    /// Advances one semi-implicit Euler step from time t. Throws
    /// NumericalDivergence when a coordinate leaves |c| <= 1e3 * L0.
    void step(DynamicState& state, double t, double dt, const PhaseField& phases) const;

private:
    struct Family {
        std::array<int, 3> offset{};
        std::size_t delta = 0;  ///< flat index offset, always positive
        double dx = 0;          ///< frozen x separation
        std::vector<double> mask;
        std::vector<double> rest;
        std::vector<double> weight_a;  ///< actuation weights of the two endpoints
        std::vector<double> weight_b;
    };

    void step_impl(DynamicState& state, double t, double dt, const std::vector<double>& cos_phase,
                   const std::vector<double>& sin_phase) const;
    void phase_tables(const PhaseField& phases, std::vector<double>& cos_phase, std::vector<double>& sin_phase) const;
    friend TipTrace simulate(const VoxelGrid&, const PhaseField&, const SimParams&);

    Dims dims_;
    SimParams params_;
    std::vector<double> x0_;
    std::vector<double> y0_;
    std::vector<double> z0_;
    std::vector<double> movable_;
    std::vector<std::size_t> mass_cells_;
    std::vector<std::size_t> tip_cells_;
    std::vector<Spring> springs_;
    std::vector<Family> families_;
};

Lattice build_lattice(const VoxelGrid& grid, const SimParams& params);

/// Runs from t = 0 to the configured duration and records the free-end
/// centroid after every step.
TipTrace simulate(const VoxelGrid& grid, const PhaseField& phases, const SimParams& params);

/// Signed upward displacement in voxel lengths: tip z averaged over the final
/// actuation cycle minus the rest z.
double fitness_displacement(const TipTrace& trace, const SimParams& params);

}  // namespace voxevo
