#pragma once

#include <array>
#include <span>
#include <vector>

#include "calciner/species.h"
#include "calciner/thermo.h"

namespace calciner {

/// Sutherland viscosity law mu0 (T/T0)^(3/2) (T0 + S) / (T + S), calibrated
/// to pass through two reference points.
struct SutherlandFit
{
    double mu0 = 0.0;
    double t0 = 0.0;
    double s = 0.0;
    /// t0 + s, kept separately because s can nearly cancel t0.
    double t0_plus_s = 0.0;

    /// Throws ValidationError when the points are degenerate or S <= -T0.
    static SutherlandFit fit(const TwoPoint& refs);
    double operator()(double T) const;
};

/// Wilke interaction parameter phi_ij.
double wilke_phi(double mu_i, double mu_j, double M_i, double M_j);

struct MixtureProps
{
    double mu_g = 0.0;            // Pa s
    double mu_m = 0.0;            // Pa s, suspension
    double k_g = 0.0;             // W/(m K)
    double k_m = 0.0;             // W/(m K), serial layers
    double rho_m = 0.0;           // kg/m^3
    double phi = 0.0;             // solid volume fraction V_s / V_delta
    double gas_fraction = 0.0;    // V_g / V_delta
    double heat_capacity = 0.0;   // sum C_i cp_i, J/(m^3 K)
    double cp_mass = 0.0;         // J/(kg K)
    double gas_concentration = 0.0; // sum C_g, mol/m^3
};

/// Per-species transport data and mixing rules.
class Transport
{
public:
    explicit Transport(const SpeciesTable& table);

    double gas_viscosity(SpeciesId s, double T) const;
    /// Linear interpolation between the two tabulated points, constant outside.
    double gas_conductivity(SpeciesId s, double T) const;
    const SutherlandFit& sutherland(SpeciesId s) const { return fits_[idx(s) - kFirstGas]; }

    /// Mixture properties of one segment. Gas mole fractions use the gas
    /// species only. Throws DomainError when there is no gas or phi >= 0.5.
    MixtureProps mixture(std::span<const double, kNumSpecies> C, double T, double P) const;

private:
    const SpeciesTable* table_;
    std::array<SutherlandFit, kNumGases> fits_{};
};

/// Signed Darcy-Weisbach (Blasius friction) velocity for a pressure change
/// dP over dz. Below |dP|/dz < regularization the power law is replaced by
/// an odd cubic matching value and slope at the threshold.
double velocity_darcy_weisbach(double dP, double dz, double mu_m, double rho_m, double D_H,
                               double regularization = 1e-6);

struct Convection
{
    double reynolds = 0.0;
    double prandtl = 0.0;
    double nusselt = 0.0;
    double friction = 0.0;
};

double gnielinski_friction(double Re);
/// Gnielinski correlation, valid for turbulent flow.
double gnielinski_nusselt(double Re, double Pr);
/// Nusselt number with the laminar fallback: 3.66 below Re = 2300, linear
/// blend to Gnielinski at Re = 3000.
Convection convection(double Re, double Pr);

struct WallLayer
{
    double width = 0.0;        // dx_i
    double conductivity = 0.0; // k_i
    double area = 0.0;         // A_i
};

/// Overall conductance A beta = (1/(A0 b0) + sum dx_i/(k_i A_i) + 1/(An bn))^-1.
/// Pass 0 for a missing film term.
double overall_conductance(double film_in, std::span<const WallLayer> layers, double film_out);

/// Weighted sum of grey gases. Weights are cubic polynomials in T; the
/// coefficient sets are tabulated against the H2O/CO2 partial-pressure
/// ratio and interpolated linearly (clamped) between sets.
struct WsggModel
{
    struct GreyGas
    {
        double kappa = 0.0;            // 1/(atm m)
        std::array<double, 4> b{};     // a(T) = b0 + b1 T + b2 T^2 + b3 T^3
    };
    struct CoefficientSet
    {
        double ratio = 0.0;            // p_H2O / p_CO2
        std::vector<GreyGas> gases;
    };
    std::vector<CoefficientSet> sets;

    /// Emissivity for partial pressures in Pa and path length in m.
    double emissivity(double T, double p_co2, double p_h2o, double path_length) const;

    /// Three grey gases plus a clear gas for CO2/H2O mixtures.
    static WsggModel default_model();
};

/// eps_c = eps_s + eps_g - eps_s eps_g.
double mixture_emissivity(double eps_s, double eps_g);

/// sigma A (eps_a T_a^4 - eps_b T_b^4), W.
double radiative_exchange(double area, double eps_a, double T_a, double eps_b, double T_b);

/// Fluxes across one face, per unit face area.
struct FaceFlux
{
    SpeciesVector molar{};  // mol/(m^2 s)
    double enthalpy = 0.0;  // W/m^2
    double conduction = 0.0; // W/m^2
};

/// First-order upwind advection plus central diffusion and conduction
/// across a face between a lower and an upper state, dz apart.
/// Enthalpy is carried at the upwind temperature.
FaceFlux face_flux(const Thermo& thermo, double velocity, std::span<const double, kNumSpecies> C_lo,
                   std::span<const double, kNumSpecies> C_hi, double T_lo, double T_hi,
                   std::span<const double, kNumSpecies> diffusivity, double conductivity, double dz);

} // namespace calciner
