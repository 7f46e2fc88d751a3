#include "calciner/transport.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "calciner/error.h"

namespace calciner {

SutherlandFit SutherlandFit::fit(const TwoPoint& refs)
{
    if (!(refs.t1 > 0.0 && refs.t2 > 0.0 && refs.t1 != refs.t2 && refs.v1 > 0.0 && refs.v2 > 0.0)) {
        throw ValidationError("sutherland fit: need two distinct positive reference points");
    }
    const double q = (refs.v2 / refs.v1) / std::pow(refs.t2 / refs.t1, 1.5);
    if (q == 1.0) {
        throw ValidationError("sutherland fit: reference points give an unbounded constant");
    }
    const double t1_plus_s = q * (refs.t1 - refs.t2) / (q - 1.0);
    const double s = t1_plus_s - refs.t1;
    if (!(t1_plus_s > 0.0 && (refs.t2 - refs.t1) + t1_plus_s > 0.0)) {
        throw ValidationError("sutherland fit: constant S = " + std::to_string(s) +
                              " does not bracket the reference temperatures");
    }
    return SutherlandFit{refs.v1, refs.t1, s, t1_plus_s};
}

double SutherlandFit::operator()(double T) const
{
    const double t_plus_s = (T - t0) + t0_plus_s;
    if (!(t_plus_s > 0.0)) {
        throw DomainError("sutherland viscosity: T + S must be positive");
    }
    return mu0 * std::pow(T / t0, 1.5) * t0_plus_s / t_plus_s;
}

double wilke_phi(double mu_i, double mu_j, double M_i, double M_j)
{
    const double a = 1.0 + std::sqrt(mu_i / mu_j) * std::pow(M_j / M_i, 0.25);
    return a * a / (2.0 * std::sqrt(2.0) * std::sqrt(1.0 + M_i / M_j));
}

Transport::Transport(const SpeciesTable& table) : table_(&table)
{
    for (std::size_t g = 0; g < kNumGases; ++g) {
        const Species& sp = table.species()[kFirstGas + g];
        try {
            fits_[g] = SutherlandFit::fit(sp.viscosity);
        } catch (const ValidationError& e) {
            throw ValidationError("species " + std::string(species_name(sp.id)) + ": " + e.what());
        }
    }
}

double Transport::gas_viscosity(SpeciesId s, double T) const
{
    if (!is_gas(s)) {
        throw DomainError("gas_viscosity: " + std::string(species_name(s)) + " is not a gas");
    }
    return fits_[idx(s) - kFirstGas](T);
}

double Transport::gas_conductivity(SpeciesId s, double T) const
{
    if (!is_gas(s)) {
        throw DomainError("gas_conductivity: " + std::string(species_name(s)) + " is not a gas");
    }
    const TwoPoint& p = (*table_)[s].gas_conductivity;
    const double t_lo = std::min(p.t1, p.t2);
    const double t_hi = std::max(p.t1, p.t2);
    const double tc = std::clamp(T, t_lo, t_hi);
    return p.v1 + (p.v2 - p.v1) * (tc - p.t1) / (p.t2 - p.t1);
}

MixtureProps Transport::mixture(std::span<const double, kNumSpecies> C, double T, double P) const
{
    MixtureProps m;
    std::array<double, kNumGases> x{};
    std::array<double, kNumGases> mu{};
    std::array<double, kNumGases> k{};
    std::array<double, kNumGases> M{};
    double total = 0.0;
    for (std::size_t g = 0; g < kNumGases; ++g) {
        x[g] = std::max(C[kFirstGas + g], 0.0);
        total += x[g];
    }
    if (!(total > 0.0)) {
        throw DomainError("mixture transport: segment contains no gas");
    }
    for (std::size_t g = 0; g < kNumGases; ++g) {
        const SpeciesId s = species_at(kFirstGas + g);
        x[g] /= total;
        mu[g] = fits_[g](T);
        k[g] = gas_conductivity(s, T);
        M[g] = (*table_)[s].molar_mass;
    }
    for (std::size_t i = 0; i < kNumGases; ++i) {
        if (x[i] == 0.0) {
            continue;
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < kNumGases; ++j) {
            if (x[j] != 0.0) {
                denom += x[j] * (i == j ? 1.0 : wilke_phi(mu[i], mu[j], M[i], M[j]));
            }
        }
        m.mu_g += x[i] * mu[i] / denom;
        m.k_g += x[i] * k[i] / denom;
    }

    m.gas_concentration = total;
    m.gas_fraction = total * kGasConstant * T / P;
    double inv_k = m.gas_fraction / m.k_g;
    for (std::size_t i = 0; i < kNumSolids; ++i) {
        const double c = std::max(C[i], 0.0);
        if (c == 0.0) {
            continue;
        }
        const Species& sp = table_->species()[i];
        const double frac = c * sp.molar_mass / sp.density;
        m.phi += frac;
        inv_k += frac / sp.solid_conductivity;
    }
    if (!(m.phi < 0.5)) {
        throw DomainError("mixture transport: solid volume fraction " + std::to_string(m.phi) +
                          " outside the suspension model domain [0, 0.5)");
    }
    m.mu_m = m.mu_g * (1.0 + 0.5 * m.phi) / (1.0 - 2.0 * m.phi);
    m.k_m = 1.0 / inv_k;

    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        const double c = std::max(C[i], 0.0);
        if (c == 0.0) {
            continue;
        }
        m.rho_m += table_->species()[i].molar_mass * c;
        m.heat_capacity += c * table_->cp_molar(species_at(i), T);
    }
    m.cp_mass = m.heat_capacity / m.rho_m;
    return m;
}

double velocity_darcy_weisbach(double dP, double dz, double mu_m, double rho_m, double D_H,
                               double regularization)
{
    const double grad = std::abs(dP) / dz;
    if (grad == 0.0) {
        return 0.0;
    }
    const double coef = 2.0 / 0.316 * std::pow(std::pow(D_H, 5) / (mu_m * rho_m * rho_m * rho_m), 0.25);
    const double sign = dP > 0.0 ? -1.0 : 1.0;
    if (grad >= regularization) {
        return sign * std::pow(coef * grad, 4.0 / 7.0);
    }
    // Odd cubic s (17 - 3 s^2) / 14 matches value and slope (4/7) at s = 1.
    const double s = grad / regularization;
    return sign * std::pow(coef * regularization, 4.0 / 7.0) * s * (17.0 - 3.0 * s * s) / 14.0;
}

double gnielinski_friction(double Re)
{
    const double d = 0.79 * std::log(Re) - 1.64;
    return 1.0 / (d * d);
}

double gnielinski_nusselt(double Re, double Pr)
{
    const double f8 = gnielinski_friction(Re) / 8.0;
    return f8 * (Re - 1000.0) * Pr / (1.0 + 12.7 * std::sqrt(f8) * (std::pow(Pr, 2.0 / 3.0) - 1.0));
}

Convection convection(double Re, double Pr)
{
    constexpr double kLaminar = 3.66;
    constexpr double kLower = 2300.0;
    constexpr double kUpper = 3000.0;
    Convection c{Re, Pr, kLaminar, Re > 0.0 ? 64.0 / Re : 0.0};
    if (Re >= kUpper) {
        c.nusselt = gnielinski_nusselt(Re, Pr);
        c.friction = gnielinski_friction(Re);
    } else if (Re > kLower) {
        const double w = (Re - kLower) / (kUpper - kLower);
        c.nusselt = (1.0 - w) * kLaminar + w * gnielinski_nusselt(kUpper, Pr);
    }
    return c;
}

double overall_conductance(double film_in, std::span<const WallLayer> layers, double film_out)
{
    double resistance = 0.0;
    if (film_in > 0.0) {
        resistance += 1.0 / film_in;
    }
    for (const WallLayer& l : layers) {
        resistance += l.width / (l.conductivity * l.area);
    }
    if (film_out > 0.0) {
        resistance += 1.0 / film_out;
    }
    return resistance > 0.0 ? 1.0 / resistance : 0.0;
}

double WsggModel::emissivity(double T, double p_co2, double p_h2o, double path_length) const
{
    constexpr double kAtm = 101325.0;
    p_co2 = std::max(p_co2, 0.0);
    p_h2o = std::max(p_h2o, 0.0);
    const double p_sum = (p_co2 + p_h2o) / kAtm;
    if (sets.empty() || p_sum <= 0.0 || path_length <= 0.0) {
        return 0.0;
    }
    auto eval = [&](const CoefficientSet& set) {
        double eps = 0.0;
        for (const GreyGas& g : set.gases) {
            const double a = g.b[0] + T * (g.b[1] + T * (g.b[2] + T * g.b[3]));
            eps += a * (1.0 - std::exp(-g.kappa * p_sum * path_length));
        }
        return eps;
    };
    const double ratio = p_co2 > 0.0 ? p_h2o / p_co2 : sets.back().ratio;
    if (ratio <= sets.front().ratio) {
        return std::clamp(eval(sets.front()), 0.0, 1.0);
    }
    for (std::size_t i = 1; i < sets.size(); ++i) {
        if (ratio <= sets[i].ratio) {
            const double w = (ratio - sets[i - 1].ratio) / (sets[i].ratio - sets[i - 1].ratio);
            return std::clamp((1.0 - w) * eval(sets[i - 1]) + w * eval(sets[i]), 0.0, 1.0);
        }
    }
    return std::clamp(eval(sets.back()), 0.0, 1.0);
}

WsggModel WsggModel::default_model()
{
    auto gas = [](double kappa, double b1, double b2, double b3, double b4) {
        return GreyGas{kappa, {b1 * 1e-1, b2 * 1e-4, b3 * 1e-7, b4 * 1e-11}};
    };
    WsggModel m;
    m.sets.push_back({0.0,
                      {gas(0.3966, 0.4334, 2.620, -1.560, 2.565), gas(15.64, -0.4814, 2.822, -1.794, 3.274),
                       gas(394.3, 0.5492, 0.1087, -0.3500, 0.9123)}});
    m.sets.push_back({1.0,
                      {gas(0.4303, 5.150, -2.303, 0.9779, -1.494), gas(7.055, 0.7749, 3.399, -2.297, 3.770),
                       gas(178.1, 1.907, -1.824, 0.5608, -0.5122)}});
    m.sets.push_back({2.0,
                      {gas(0.4201, 6.508, -5.551, 3.029, -5.353), gas(6.516, -0.2504, 6.112, -3.882, 6.528),
                       gas(131.9, 2.718, -3.118, 1.221, -1.612)}});
    return m;
}

double mixture_emissivity(double eps_s, double eps_g)
{
    return eps_s + eps_g - eps_s * eps_g;
}

double radiative_exchange(double area, double eps_a, double T_a, double eps_b, double T_b)
{
    const double a2 = T_a * T_a;
    const double b2 = T_b * T_b;
    return kStefanBoltzmann * area * (eps_a * a2 * a2 - eps_b * b2 * b2);
}

FaceFlux face_flux(const Thermo& thermo, double velocity, std::span<const double, kNumSpecies> C_lo,
                   std::span<const double, kNumSpecies> C_hi, double T_lo, double T_hi,
                   std::span<const double, kNumSpecies> diffusivity, double conductivity, double dz)
{
    FaceFlux f;
    const bool upward = velocity >= 0.0;
    const auto& C_up = upward ? C_lo : C_hi;
    const double T_up = upward ? T_lo : T_hi;
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        f.molar[i] = velocity * C_up[i];
        if (diffusivity[i] != 0.0) {
            f.molar[i] -= diffusivity[i] * (C_hi[i] - C_lo[i]) / dz;
        }
    }
    f.enthalpy = thermo.enthalpy(T_up, f.molar);
    f.conduction = -conductivity * (T_hi - T_lo) / dz;
    return f;
}

} // namespace calciner
