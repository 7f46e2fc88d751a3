#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace calciner {

/// Universal gas constant, J/(mol K).
inline constexpr double kGasConstant = 8.314462618;
/// Stefan-Boltzmann constant, W/(m^2 K^4).
inline constexpr double kStefanBoltzmann = 5.670374419e-8;

enum class Phase { Solid, Gas };

/// Fixed species ordering: the ten solids first, then the seven gases.
/// Every species-indexed array in the library uses this order.
enum class SpeciesId : std::size_t {
    CaCO3, CaO, SiO2, Al2O3, Fe2O3, C2S, C3S, C3A, C4AF, C,
    CO2, N2, O2, Ar, CO, H2, H2O
};

inline constexpr std::size_t kNumSpecies = 17;
inline constexpr std::size_t kNumSolids = 10;
inline constexpr std::size_t kNumGases = 7;
inline constexpr std::size_t kFirstGas = kNumSolids;
inline constexpr std::size_t kNumReactions = 11;

using SpeciesVector = std::array<double, kNumSpecies>;

constexpr std::size_t idx(SpeciesId s) { return static_cast<std::size_t>(s); }
constexpr SpeciesId species_at(std::size_t i) { return static_cast<SpeciesId>(i); }
constexpr bool is_gas(SpeciesId s) { return idx(s) >= kFirstGas; }

std::string_view species_name(SpeciesId s);
std::optional<SpeciesId> parse_species(std::string_view name);

enum class Element : std::size_t { Ca, Si, Al, Fe, C, O, H, N, Ar };
inline constexpr std::size_t kNumElements = 9;
std::string_view element_name(Element e);

/// Atom counts of each element in one formula unit of the species.
const std::array<int, kNumElements>& element_counts(SpeciesId s);

/// Molar heat capacity correlation.
///
/// Polynomial form: cp = c0 + c1 T + c2 T^2.
/// Five-term form (calcite): cp = c0 + c1 T + c2 T^2 + d T^-2 + e T^-1/2.
struct HeatCapacity
{
    enum class Form { Polynomial, FiveTerm };

    Form form = Form::Polynomial;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double d = 0.0;
    double e = 0.0;
    /// Declared validity range; t_max <= 0 means no range was declared.
    double t_min = 0.0;
    double t_max = 0.0;

    double operator()(double T) const;
    /// Exact integral of cp from Ta to Tb, J/mol.
    double integral(double Ta, double Tb) const;
    bool in_range(double T) const { return t_max <= 0.0 || (T >= t_min && T <= t_max); }
};

/// Two tabulated (temperature, value) pairs.
struct TwoPoint
{
    double t1 = 0.0;
    double v1 = 0.0;
    double t2 = 0.0;
    double v2 = 0.0;
};

struct Species
{
    SpeciesId id{};
    Phase phase = Phase::Solid;
    double molar_mass = 0.0;         // kg/mol
    double density = 0.0;            // kg/m^3, solids only
    HeatCapacity cp;                 // J/(mol K)
    double formation_enthalpy = 0.0; // J/mol at (T0, P0)
    double solid_conductivity = 0.0; // W/(m K), solids only
    TwoPoint gas_conductivity;       // (K, W/(m K)), gases only
    TwoPoint viscosity;              // (K, Pa s), gases only
    double diffusion_volume = 0.0;   // cm^3
    double emissivity = 0.0;
};

/// Inert pseudo-species used for the refractory lining and the steel shell.
struct Material
{
    std::string name;
    double molar_mass = 0.0;         // kg/mol
    double density = 0.0;            // kg/m^3
    double conductivity = 0.0;       // W/(m K)
    double formation_enthalpy = 0.0; // J/mol
    double emissivity = 0.0;
    HeatCapacity cp;

    /// Fixed molar concentration of the solid material, mol/m^3.
    double concentration() const { return density / molar_mass; }
};

/// Unit of the tabulated rate expression. Kinetics converts all three to
/// mol of reaction extent per m^3 per second.
enum class RateUnit { KgPerM3PerS, MolPerM3PerS, PerS };

struct ReactionSpec
{
    int index = 0;
    std::string equation;
    SpeciesVector stoich{};
    RateUnit unit = RateUnit::MolPerM3PerS;
    double k0 = 0.0;
    double temperature_exponent = 0.0;
    double activation_energy = 0.0; // J/mol
    std::vector<std::pair<SpeciesId, double>> concentration_orders;
    std::vector<std::pair<SpeciesId, double>> pressure_orders;
    /// Pa per unit of the partial pressures in the rate law (1 for Pa, 101325 for atm).
    double pressure_unit = 1.0;
    /// Species the tabulated rate refers to (first reactant).
    SpeciesId reference{};
};

/// Immutable registry of species, reaction, and lining-material data.
class SpeciesTable
{
public:
    /// Parse a property-data document. Throws ValidationError naming the
    /// offending species, reaction, or field.
    static SpeciesTable from_json(const nlohmann::json& doc);
    static SpeciesTable from_string(std::string_view text);
    static SpeciesTable load(const std::filesystem::path& path);
    /// The property document shipped with the library.
    static SpeciesTable bundled();
    static std::string_view bundled_document();

    const Species& operator[](SpeciesId s) const { return species_[idx(s)]; }
    const std::array<Species, kNumSpecies>& species() const { return species_; }
    const std::array<ReactionSpec, kNumReactions>& reactions() const { return reactions_; }
    const Material& refractory() const { return refractory_; }
    const Material& shell() const { return shell_; }

    double T0() const { return t0_; }
    double P0() const { return p0_; }

    /// Molar heat capacity, J/(mol K). Outside the declared range the same
    /// formula is extrapolated and a once-per-species warning flag is set.
    double cp_molar(SpeciesId s, double T) const;

    /// Species whose cp has been evaluated outside the declared range.
    std::vector<SpeciesId> range_warnings() const;
    void clear_range_warnings() const;

    /// Row j is reaction j+1: reactants negative, products positive.
    std::array<SpeciesVector, kNumReactions> stoichiometry() const;

private:
    SpeciesTable();

    std::array<Species, kNumSpecies> species_{};
    std::array<ReactionSpec, kNumReactions> reactions_{};
    Material refractory_;
    Material shell_;
    double t0_ = 298.15;
    double p0_ = 101325.0;

    struct Warnings
    {
        std::array<std::atomic<bool>, kNumSpecies> flags{};
    };
    std::shared_ptr<Warnings> warnings_;
};

/// Element totals of a species vector (mol of atoms).
std::array<double, kNumElements> element_totals(std::span<const double, kNumSpecies> moles);

} // namespace calciner
