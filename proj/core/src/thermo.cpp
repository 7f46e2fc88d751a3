#include "calciner/thermo.h"

#include <cmath>
#include <string>

#include "calciner/error.h"

namespace calciner {

namespace {

template <typename F>
double solve_monotone(F&& residual, double target, double guess, const char* what)
{
    // residual(T) returns {U(T), dU/dT}; U is strictly increasing in T.
    double lo = Thermo::kTMin;
    double hi = Thermo::kTMax;
    double f_lo = residual(lo).first - target;
    double f_hi = residual(hi).first - target;
    if (f_lo > 0.0 || f_hi < 0.0) {
        throw BracketError(std::string(what) + ": internal energy outside the range attained on [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "] K");
    }
    double T = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        auto [u, dudt] = residual(T);
        double f = u - target;
        if (f == 0.0) {
            return T;
        }
        if (f < 0.0) {
            lo = T;
        } else {
            hi = T;
        }
        double next = (dudt > 0.0) ? T - f / dudt : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        double step = std::abs(next - T);
        T = next;
        if (step <= 1e-12 * std::max(1.0, T) || hi - lo <= 1e-12 * T) {
            return T;
        }
    }
    throw BracketError(std::string(what) + ": temperature inversion did not converge");
}

} // namespace

void Thermo::check_temperature(double T, const char* where)
{
    if (!(T >= kTMin && T <= kTMax)) {
        throw DomainError(std::string(where) + ": temperature " + std::to_string(T) +
                          " K outside [200, 3000] K");
    }
}

double Thermo::species_enthalpy(SpeciesId s, double T) const
{
    const Species& sp = (*table_)[s];
    return sp.formation_enthalpy + sp.cp.integral(table_->T0(), T);
}

double Thermo::enthalpy(Phase phase, double T, std::span<const double> n) const
{
    check_temperature(T, "enthalpy");
    const std::size_t first = phase == Phase::Gas ? kFirstGas : 0;
    const std::size_t count = phase == Phase::Gas ? kNumGases : kNumSolids;
    if (n.size() != count) {
        throw DomainError("enthalpy: composition has the wrong length for the phase");
    }
    double h = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        if (n[i] != 0.0) {
            h += n[i] * species_enthalpy(species_at(first + i), T);
        }
    }
    return h;
}

double Thermo::enthalpy(double T, std::span<const double, kNumSpecies> n) const
{
    return enthalpy(Phase::Solid, T, n.first<kNumSolids>()) + enthalpy(Phase::Gas, T, n.last<kNumGases>());
}

double Thermo::heat_capacity(double T, std::span<const double, kNumSpecies> n) const
{
    double c = 0.0;
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        if (n[i] != 0.0) {
            c += n[i] * table_->cp_molar(species_at(i), T);
        }
    }
    return c;
}

double Thermo::volume(Phase phase, double T, double P, std::span<const double> n) const
{
    if (phase == Phase::Gas) {
        if (n.size() != kNumGases) {
            throw DomainError("volume: gas composition must have 7 entries");
        }
        double total = 0.0;
        for (double x : n) {
            total += x;
        }
        return total * kGasConstant * T / P;
    }
    if (n.size() != kNumSolids) {
        throw DomainError("volume: solid composition must have 10 entries");
    }
    double v = 0.0;
    for (std::size_t i = 0; i < kNumSolids; ++i) {
        const Species& sp = table_->species()[i];
        v += n[i] * sp.molar_mass / sp.density;
    }
    return v;
}

double Thermo::material_enthalpy(const Material& m, double T, double n) const
{
    check_temperature(T, "material enthalpy");
    return n * (m.formation_enthalpy + m.cp.integral(table_->T0(), T));
}

double Thermo::material_heat_capacity(const Material& m, double T, double n) const
{
    return n * m.cp(T);
}

double Thermo::mixture_internal_energy_density(std::span<const double, kNumSpecies> C, double T,
                                               double P) const
{
    auto gas = C.last<kNumGases>();
    return enthalpy(Phase::Solid, T, C.first<kNumSolids>()) + enthalpy(Phase::Gas, T, gas) -
           P * volume(Phase::Gas, T, P, gas);
}

double Thermo::mixture_heat_capacity_density(std::span<const double, kNumSpecies> C, double T) const
{
    double gas_total = 0.0;
    for (std::size_t i = kFirstGas; i < kNumSpecies; ++i) {
        gas_total += C[i];
    }
    return heat_capacity(T, C) - kGasConstant * gas_total;
}

double Thermo::invert_mixture_temperature(double U, std::span<const double, kNumSpecies> C, double P,
                                          double guess) const
{
    auto eval = [&](double T) {
        return std::pair{mixture_internal_energy_density(C, T, P), mixture_heat_capacity_density(C, T)};
    };
    return solve_monotone(eval, U, guess, "mixture temperature");
}

double Thermo::invert_material_temperature(double U, const Material& m, double c, double guess) const
{
    auto eval = [&](double T) {
        return std::pair{material_enthalpy(m, T, c), material_heat_capacity(m, T, c)};
    };
    return solve_monotone(eval, U, guess, m.name.c_str());
}

double Thermo::heat_of_reaction(const ReactionSpec& rx, double T) const
{
    return enthalpy(T, std::span<const double, kNumSpecies>(rx.stoich));
}

} // namespace calciner
