#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "calciner/dae.h"
#include "calciner/geometry.h"
#include "calciner/kinetics.h"
#include "calciner/species.h"
#include "calciner/thermo.h"
#include "calciner/transport.h"

namespace calciner {

/// Layout of one segment block in the state vector.
namespace layout {
inline constexpr std::size_t kUc = kNumSpecies;
inline constexpr std::size_t kUr = kNumSpecies + 1;
inline constexpr std::size_t kUw = kNumSpecies + 2;
inline constexpr std::size_t kTc = kNumSpecies + 3;
inline constexpr std::size_t kTr = kNumSpecies + 4;
inline constexpr std::size_t kTw = kNumSpecies + 5;
inline constexpr std::size_t kP = kNumSpecies + 6;
inline constexpr std::size_t kBlock = kNumSpecies + 7;
/// Scale of the internal-energy rows (J/m^3).
inline constexpr double kEnergyScale = 1e6;
} // namespace layout

struct Stream
{
    std::string name;
    SpeciesVector mass_flow{}; // kg/s
    double temperature = 298.15;
};

struct BoundarySpec
{
    std::vector<Stream> inlets;
    double outlet_pressure = 101325.0;
    double ambient_temperature = 298.15;

    void validate() const;
};

struct HeatTransferSpec
{
    /// Chamber/refractory/shell exchange. Off gives an internally adiabatic model.
    bool internal = true;
    /// Shell/environment exchange.
    bool exterior = true;
    double exterior_coefficient = 5.0;   // W/(m^2 K)
    double environment_emissivity = 1.0;
    double solid_emissivity = 0.9;
    double beam_length_factor = 0.95;    // L = factor * D_H
    WsggModel wsgg = WsggModel::default_model();
};

struct ModelOptions
{
    /// No inlets and a closed top face.
    bool closed = false;
    bool reactions = true;
    double velocity_regularization = 1e-6; // Pa/m
    SpeciesVector diffusivity{};           // m^2/s
    /// Concentrations below -tolerance make a state inadmissible.
    double negative_tolerance = 1e-8;      // mol/m^3
    HeatTransferSpec heat;
};

/// Initial condition of every segment.
struct InitialCondition
{
    double T_c = 673.15;
    double T_r = 673.15;
    double T_w = 673.15;
    /// Zero means the outlet pressure.
    double pressure = 0.0;
    /// Gas mole fractions (solid entries ignored); normalized internally.
    SpeciesVector gas_fractions{};
    /// Solid concentrations, mol/m^3 (gas entries ignored).
    SpeciesVector solids{};
};

/// Per-segment quantities derived while assembling the residual.
struct SegmentDiagnostics
{
    double T_c = 0.0, T_r = 0.0, T_w = 0.0, P = 0.0;
    double velocity = 0.0; // segment velocity used for Re
    MixtureProps props;
    Convection convection;
    double beta_cr = 0.0;
    double conductance_rw = 0.0; // A beta, W/K
    double eps_g = 0.0;
    double eps_c = 0.0;
    double Q_cr_cv = 0.0, Q_cr_rad = 0.0, Q_rw_cv = 0.0, Q_we_cv = 0.0, Q_we_rad = 0.0; // W
    RateVector rates;
};

struct FaceDiagnostics
{
    double y = 0.0;
    double velocity = 0.0;      // m/s
    double area = 0.0;          // m^2 advective area
    SpeciesVector molar{};      // mol/s through the face (upward positive)
    double enthalpy = 0.0;      // W
    double conduction = 0.0;    // W, chamber
};

struct ModelDiagnostics
{
    std::vector<SegmentDiagnostics> segments;
    /// n_v + 1 faces, bottom first; face 0 is the closed bottom.
    std::vector<FaceDiagnostics> faces;
    SpeciesVector inlet_molar{}; // mol/s
    double inlet_enthalpy = 0.0; // W
};

/// Inventory of a state: species moles and total internal energy.
struct Inventory
{
    SpeciesVector moles{};
    double energy = 0.0; // J
};

/// One-dimensional finite-volume calciner model as a semi-explicit DAE.
class CalcinerModel : public DaeSystem
{
public:
    CalcinerModel(const SpeciesTable& table, const GeometrySpec& geometry, BoundarySpec boundary,
                  const CalibrationFactors& factors = default_calibration(), ModelOptions options = {});

    std::size_t segments() const { return geometry_.size(); }
    const std::vector<SegmentGeometry>& geometry() const { return geometry_; }
    const GeometrySpec& geometry_spec() const { return spec_; }
    const BoundarySpec& boundary() const { return boundary_; }
    const ModelOptions& options() const { return options_; }
    const Thermo& thermo() const { return thermo_; }
    const Transport& transport() const { return transport_; }
    const Kinetics& kinetics() const { return kinetics_; }

    std::size_t size() const override { return geometry_.size() * layout::kBlock; }
    std::size_t block_size() const override { return layout::kBlock; }
    std::size_t block_bandwidth() const override { return 1; }
    bool is_algebraic(std::size_t i) const override { return i % layout::kBlock >= layout::kTc; }
    void residual(double t, std::span<const double> z, std::span<double> out) const override;
    double row_scale(std::size_t i) const override;
    double absolute_tolerance(std::size_t i) const override;
    double perturbation(std::size_t i, double v) const override;
    double steady_floor(std::size_t i) const override;
    bool admissible(std::span<const double> z) const override;
    /// Explicit per-segment closure: temperature inversions and P from the
    /// volume constraint. Throws SolverError naming the segment and phase.
    void solve_algebraic(double t, std::span<double> z) const override;

    /// Differential state of a uniform fill, with consistent algebraic part.
    std::vector<double> initial_state(const InitialCondition& ic) const;

    /// Residual plus everything derived along the way.
    ModelDiagnostics diagnostics(std::span<const double> z) const;

    Inventory inventory(std::span<const double> z) const;
    /// d/dt of the inventory implied by the differential right-hand side.
    Inventory inventory_rate(std::span<const double> z) const;

    /// Molar flow (mol/s) and enthalpy (W) of all inlet streams combined.
    const SpeciesVector& inlet_molar() const { return inlet_molar_; }
    double inlet_enthalpy() const { return inlet_enthalpy_; }

private:
    void assemble(std::span<const double> z, std::span<double> out, ModelDiagnostics* diag) const;

    const SpeciesTable* table_;
    GeometrySpec spec_;
    std::vector<SegmentGeometry> geometry_;
    BoundarySpec boundary_;
    ModelOptions options_;
    Thermo thermo_;
    Transport transport_;
    Kinetics kinetics_;

    SpeciesVector inlet_molar_{};
    double inlet_enthalpy_ = 0.0;
    double refractory_concentration_ = 0.0;
    double shell_concentration_ = 0.0;
    std::vector<double> conductance_rw_;
    double pressure_perturbation_ = 1e-4; // Pa
};

} // namespace calciner
