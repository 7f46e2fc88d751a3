#include "calciner/kinetics.h"

#include <cmath>
#include <string>

#include "calciner/error.h"

namespace calciner {

namespace {

double power(double c, double order, double shift)
{
    if (c <= 0.0) {
        return 0.0;
    }
    if (order == 1.0) {
        return c;
    }
    if (order < 1.0) {
        return c * std::pow(c + shift, order - 1.0);
    }
    return std::pow(c, order);
}

} // namespace

CalibrationFactors default_calibration()
{
    CalibrationFactors f;
    f.fill(1.0);
    f[0] = 270.0;
    f[5] = 5e5;
    f[8] = 60.0;
    return f;
}

double rate_constant(const ReactionSpec& rx, double factor, double T)
{
    double k = factor * rx.k0 * std::exp(-rx.activation_energy / (kGasConstant * T));
    if (rx.temperature_exponent != 0.0) {
        k *= std::pow(T, rx.temperature_exponent);
    }
    return k;
}

Kinetics::Kinetics(const SpeciesTable& table, const CalibrationFactors& factors)
    : table_(&table), factors_(factors), nu_(table.stoichiometry())
{
    for (std::size_t j = 0; j < kNumReactions; ++j) {
        if (!(factors_[j] >= 0.0) || !std::isfinite(factors_[j])) {
            throw ValidationError("calibration factor r" + std::to_string(j + 1) + " must be non-negative");
        }
        const ReactionSpec& rx = table.reactions()[j];
        extent_scale_[j] = rx.unit == RateUnit::KgPerM3PerS ? 1.0 / table[rx.reference].molar_mass : 1.0;
    }
}

double Kinetics::rate_constant(std::size_t j, double T) const
{
    return calciner::rate_constant(table_->reactions()[j], factors_[j], T);
}

RateVector Kinetics::rates(double T, double P, std::span<const double, kNumSpecies> C,
                           NegativePolicy policy) const
{
    RateVector out;
    SpeciesVector c{};
    double gas_total = 0.0;
    for (std::size_t i = 0; i < kNumSpecies; ++i) {
        if (C[i] < 0.0) {
            if (policy == NegativePolicy::Reject) {
                throw DomainError("reaction rates: negative concentration of " +
                                  std::string(species_name(species_at(i))));
            }
        } else {
            c[i] = C[i];
        }
        if (i >= kFirstGas) {
            gas_total += c[i];
        }
    }

    for (std::size_t j = 0; j < kNumReactions; ++j) {
        const ReactionSpec& rx = table_->reactions()[j];
        if (factors_[j] == 0.0) {
            continue;
        }
        double r = rate_constant(j, T);
        for (const auto& [s, order] : rx.concentration_orders) {
            r *= power(c[idx(s)] * 1e-3, order, kConcentrationShift);
        }
        for (const auto& [s, order] : rx.pressure_orders) {
            const double p = gas_total > 0.0 ? c[idx(s)] / gas_total * P / rx.pressure_unit : 0.0;
            r *= power(p, order, kPressureShift);
        }
        if (rx.unit == RateUnit::PerS) {
            r *= c[idx(rx.reference)];
        }
        out.r[j] = r * extent_scale_[j];
    }

    for (std::size_t j = 0; j < kNumReactions; ++j) {
        if (out.r[j] == 0.0) {
            continue;
        }
        for (std::size_t i = 0; i < kNumSpecies; ++i) {
            out.R[i] += nu_[j][i] * out.r[j];
        }
    }
    return out;
}

} // namespace calciner
