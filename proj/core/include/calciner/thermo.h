#pragma once

#include <span>

#include "calciner/species.h"

namespace calciner {

/// Phases carrying an internal-energy state in each segment.
enum class EnergyPhase { Mixture, Refractory, Shell };

/// Enthalpy / volume / internal-energy model. All functions are
/// homogeneous of order one in the mole (or concentration) vectors, so the
/// same calls give extensive values (mol in) or densities (mol/m^3 in).
class Thermo
{
public:
    static constexpr double kTMin = 200.0;
    static constexpr double kTMax = 3000.0;

    explicit Thermo(const SpeciesTable& table) : table_(&table) {}

    const SpeciesTable& table() const { return *table_; }

    /// Molar enthalpy dH_f + integral of cp from T0 to T, J/mol.
    double species_enthalpy(SpeciesId s, double T) const;

    /// Solid (10 entries) or gas (7 entries) enthalpy, J.
    double enthalpy(Phase phase, double T, std::span<const double> n) const;
    /// Enthalpy over the full 17-species vector, J.
    double enthalpy(double T, std::span<const double, kNumSpecies> n) const;
    /// sum_i n_i cp_i over the full vector, J/K.
    double heat_capacity(double T, std::span<const double, kNumSpecies> n) const;

    /// Solids: sum n_i M_i / rho_i. Gases: sum n_i R T / P. m^3.
    double volume(Phase phase, double T, double P, std::span<const double> n) const;

    double material_enthalpy(const Material& m, double T, double n) const;
    double material_heat_capacity(const Material& m, double T, double n) const;

    /// U_c = H_s + H_g - P V_g evaluated on concentrations, J/m^3.
    double mixture_internal_energy_density(std::span<const double, kNumSpecies> C, double T,
                                           double P) const;
    /// dU_c/dT at fixed concentrations, J/(m^3 K).
    double mixture_heat_capacity_density(std::span<const double, kNumSpecies> C, double T) const;

    /// Solve U(T) = U for the mixture phase. Safeguarded Newton on the
    /// [kTMin, kTMax] bracket; throws BracketError when U lies outside it.
    double invert_mixture_temperature(double U, std::span<const double, kNumSpecies> C, double P,
                                      double guess = 1000.0) const;
    /// Same for the refractory or shell pseudo-species at concentration c.
    double invert_material_temperature(double U, const Material& m, double c,
                                       double guess = 1000.0) const;

    /// Sum_i nu_i (dH_f,i + integral cp_i), J/mol of reaction extent.
    double heat_of_reaction(const ReactionSpec& rx, double T) const;

    /// Throws DomainError unless kTMin <= T <= kTMax.
    static void check_temperature(double T, const char* where);

private:
    const SpeciesTable* table_;
};

} // namespace calciner
